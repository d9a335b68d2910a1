#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

namespace sccsim {

using SimTime = std::int64_t;  // picoseconds

// Cost model of the simulated chip. Clock rates come from the hardware;
// every other number is a calibration parameter fit against the two
// microbenchmark curve shapes, not measured ground truth.
struct Calibration {
  double core_mhz = 533.0;
  double mesh_mhz = 800.0;
  double mc_mhz = 800.0;

  // Mesh and MPB (mesh cycles / core cycles).
  std::int64_t mesh_hop_cycles = 4;    // per hop, one way, mesh clock
  std::int64_t mpb_access_cycles = 20; // per 32-byte line, core clock

  // Memory controller (mc clock).
  std::int64_t mc_service_cycles_per_line = 40;  // per 32-byte transfer
  std::int64_t dram_base_cycles = 46;            // per transaction

  // Fences (core clock). The L2 has no partial flush, so both L2
  // operations are whole-cache constants.
  std::int64_t l1_invalidate_cycles = 300;
  std::int64_t l2_invalidate_cycles = 40000;
  std::int64_t l2_flush_cycles = 120000;
  std::int64_t wcb_flush_cycles = 120;

  // Master-side runtime costs (core clock).
  std::int64_t spawn_cycles = 1500;
  std::int64_t dep_cycles_per_block = 40;
  std::int64_t release_cycles = 300;
  std::int64_t release_cycles_per_dependent = 60;
  std::int64_t schedule_cycles = 200;

  // Cycles per abstract flop, per kernel family.
  std::map<std::string, double> alpha = {
      {"blackscholes", 1.0}, {"matmul", 1.5},   {"fft", 0.1},
      {"jacobi", 1.0},       {"cholesky", 0.1}, {"stream", 1.0},
  };

  SimTime core_ps(std::int64_t cycles) const {
    return static_cast<SimTime>(std::llround(cycles * 1e6 / core_mhz));
  }
  SimTime mesh_ps(std::int64_t cycles) const {
    return static_cast<SimTime>(std::llround(cycles * 1e6 / mesh_mhz));
  }
  SimTime mc_ps(std::int64_t cycles) const {
    return static_cast<SimTime>(std::llround(cycles * 1e6 / mc_mhz));
  }

  double alpha_for(const std::string& kernel) const;
  std::int64_t flops_to_cycles(const std::string& kernel, double flops) const {
    return static_cast<std::int64_t>(std::llround(alpha_for(kernel) * flops));
  }

  static Calibration load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace sccsim
