#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sccsim/allocator.hpp"
#include "sccsim/calibration.hpp"
#include "sccsim/depengine.hpp"

namespace sccsim {

// Kernel tags carried in task descriptors.
enum FnTag : std::uint32_t {
  kFnBlackScholes = 1,
  kFnGemm = 2,
  kFnFftTransform = 3,
  kFnFftTranspose = 4,
  kFnJacobi = 5,
  kFnPotrf = 6,
  kFnTrsm = 7,
  kFnCholGemm = 8,
  kFnStream = 9,
  kFnRandom = 10,
};

struct Workload {
  std::string name;  // calibration alpha key
  std::shared_ptr<SharedRegion> region;
  std::vector<TaskDescriptor> tasks;       // task_id == spawn index
  std::vector<std::uint32_t> data_blocks;  // every allocated block
};

Workload gen_blackscholes(std::uint64_t n_options, std::uint64_t options_per_task,
                          AllocMode mode, const Calibration& cal);
Workload gen_matmul(std::uint64_t n, std::uint64_t tile, AllocMode mode, const Calibration& cal);
Workload gen_fft(std::uint64_t n, std::uint64_t rows_per_task, std::uint64_t tile,
                 AllocMode mode, const Calibration& cal);
Workload gen_jacobi(std::uint64_t n, std::uint64_t tile, int iters, AllocMode mode,
                    const Calibration& cal);
Workload gen_cholesky(std::uint64_t n, std::uint64_t tile, AllocMode mode,
                      const Calibration& cal);

// Randomized task graphs for the serial-elision and protocol-safety suites.
Workload gen_random_graph(std::uint64_t seed, std::size_t n_tasks, std::size_t n_blocks,
                          const Calibration& cal);

// §-style microbenchmarks: one streaming task at a given controller
// distance, or a reference stream at 9 hops plus competitor streams.
Workload gen_latency_microbench(int hops, const Topology& topo);
Workload gen_contention_microbench(int num_competitors, const Topology& topo);

// Named lookup used by the CLI: blackscholes | matmul | fft | jacobi |
// cholesky, at full scale or desk scale.
Workload make_workload(const std::string& name, bool full_scale, AllocMode mode,
                       const Calibration& cal);

}  // namespace sccsim
