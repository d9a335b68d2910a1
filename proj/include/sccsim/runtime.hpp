#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <vector>

#include "sccsim/allocator.hpp"
#include "sccsim/depengine.hpp"
#include "sccsim/machine.hpp"
#include "sccsim/topology.hpp"

namespace sccsim {

enum class SlotState : std::uint8_t { Empty = 0, Ready = 1, Completed = 2 };

struct SlotTransition {
  int worker_core;
  int slot;
  SlotState from;
  SlotState to;
  bool by_master;
  SimTime at;
};

struct TaskExecRecord {
  std::uint64_t task_id;
  int worker_core;
  SimTime start;
  SimTime end;
};

struct RuntimeConfig {
  int num_workers = 4;
  SimTime visibility_delay = 0;  // master MPB writes become visible this late
  std::size_t pool_capacity = 512;
  int slot_lines = 2;  // descriptor size in MPB lines
  bool record_exec = true;
  bool record_transitions = true;
};

struct WorkerStats {
  int core = 0;
  CoreAccum accum;
  std::uint64_t tasks_executed = 0;
  int max_outstanding = 0;
};

struct RunStats {
  SimTime total_time = 0;
  std::uint64_t tasks_spawned = 0;
  std::uint64_t tasks_executed = 0;
  std::uint64_t tasks_released = 0;
  CoreAccum master;
  std::vector<WorkerStats> workers;
  std::array<std::uint64_t, Topology::kMcCount> mc_bytes{};
};

// One experiment run: the master agent spawns the program's tasks in
// order through the dependence engine and the per-worker MPB queues;
// workers execute with the full fence discipline. Deterministic; one
// instance per thread of control.
class Simulation {
 public:
  Simulation(const Topology& topo, const Calibration& cal, const SharedRegion& region,
             RuntimeConfig cfg);
  ~Simulation();

  RunStats run(const std::vector<TaskDescriptor>& program, BlockState initial = {});

  const BlockState& final_state() const;
  const std::vector<TaskExecRecord>& exec_records() const;
  const std::vector<SlotTransition>& transitions() const;
  Machine& machine();
  const Placement& placement() const;

  // Fault injection: the nth worker never polls its queue.
  void stall_worker(int nth);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string stats_to_json(const RunStats& stats);

}  // namespace sccsim
