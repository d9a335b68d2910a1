#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sccsim/runtime.hpp"
#include "sccsim/workloads.hpp"

namespace sccsim {

struct ExperimentConfig {
  std::string workload = "matmul";
  bool full_scale = false;
  std::vector<int> workers = {1, 2, 4, 8, 16, 22, 32, 43};
  AllocMode alloc_mode = AllocMode::Strided;
  std::uint64_t seed = 0;
  bool seed_set = false;
  SimTime visibility_delay = 0;
  std::string calibration_path;  // empty: built-in defaults
  std::string out_dir = ".";
};

// key = value text, '#' comments. Throws ConfigError with a line number.
ExperimentConfig parse_config(std::istream& in, const std::string& origin);
ExperimentConfig parse_config_file(const std::string& path);
// "1,2,4" or "1..43" (also "1-43"), mixed: "1,4..8,43".
std::vector<int> parse_worker_list(const std::string& text);

struct RunResult {
  std::string workload;
  int workers = 0;
  std::uint64_t tasks = 0;
  SimTime total = 0;
  SimTime baseline = 0;
  double speedup = 0.0;
  RunStats stats;
  std::array<std::uint64_t, Topology::kMcCount> mc_hist{};
};

// Closed-form sequential run at the master core: compute plus uncontended
// memory traffic at the nearest controller, no fences, no runtime.
SimTime run_sequential_baseline(const Workload& w, const Topology& topo, const Calibration& cal);

RunResult run_point(const Workload& w, int workers, const Topology& topo, const Calibration& cal,
                    SimTime visibility_delay, SimTime baseline);

// One RunResult per worker count; writes <out>/<name>_sweep.csv plus a
// JSON sidecar with full breakdowns. Deterministic byte output.
std::vector<RunResult> run_sweep(const ExperimentConfig& cfg);

// <out>/<name>_breakdown.csv (cumulative stacked buckets per worker
// count) and <out>/<name>_balance.csv (per-worker at the largest count).
void emit_breakdown(const std::vector<RunResult>& results, const std::string& out_dir);

std::string sweep_csv(const std::vector<RunResult>& results);
std::string sweep_json(const std::vector<RunResult>& results);

// Direct execution of pinned streaming tasks against the contended
// machine, bypassing the runtime (no fences, no queues). Returns each
// task's finish time, in task order.
std::vector<SimTime> run_stream_direct(const Workload& w, const Topology& topo,
                                       const Calibration& cal);

// Latency curve over hops 1..9 and contention curve over 0..max
// competitors (reference-core time).
std::vector<SimTime> latency_curve(const Topology& topo, const Calibration& cal);
std::vector<SimTime> contention_curve(const Topology& topo, const Calibration& cal,
                                      int max_competitors);

// Built-in property suite for the `check` subcommand; prints one line per
// property and returns true when all hold.
bool run_builtin_checks(std::ostream& os);

}  // namespace sccsim
