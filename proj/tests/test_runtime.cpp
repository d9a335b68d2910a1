#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "sccsim/runtime.hpp"
#include "sccsim/workloads.hpp"

using namespace sccsim;

namespace {

struct Built {
  std::shared_ptr<SharedRegion> region;
  std::vector<TaskDescriptor> tasks;
};

TaskArg arg(AccessMode m, std::vector<std::uint32_t> blocks) {
  TaskArg a;
  a.mode = m;
  a.blocks = std::move(blocks);
  return a;
}

// Small hand-built program over real region blocks.
Built diamond_program() {
  Built b;
  b.region = std::make_shared<SharedRegion>();
  Allocation alloc = b.region->alloc(8 * 4096, AllocMode::Strided);
  auto blk = [&](int i) { return alloc.block_ids[static_cast<std::size_t>(i)]; };
  auto task = [&](std::uint64_t id, std::vector<TaskArg> args) {
    TaskDescriptor t;
    t.task_id = id;
    t.fn_tag = 1;
    t.compute_cycles = 5000;
    t.args = std::move(args);
    b.tasks.push_back(std::move(t));
  };
  task(0, {arg(AccessMode::Out, {blk(0), blk(1)})});
  task(1, {arg(AccessMode::In, {blk(0)}), arg(AccessMode::Out, {blk(2)})});
  task(2, {arg(AccessMode::In, {blk(1)}), arg(AccessMode::Out, {blk(3)})});
  task(3, {arg(AccessMode::In, {blk(2), blk(3)}), arg(AccessMode::Out, {blk(4)})});
  return b;
}

Built random_program(std::uint64_t seed, std::size_t n_tasks, std::size_t n_blocks) {
  Built b;
  Calibration cal;
  Workload w = gen_random_graph(seed, n_tasks, n_blocks, cal);
  b.region = w.region;
  b.tasks = std::move(w.tasks);
  return b;
}

RunStats run_once(const Built& b, int workers, SimTime delay, Simulation*& out,
                  std::vector<std::unique_ptr<Simulation>>& keep) {
  Topology topo;
  Calibration cal;
  RuntimeConfig cfg;
  cfg.num_workers = workers;
  cfg.visibility_delay = delay;
  keep.push_back(std::make_unique<Simulation>(topo, cal, *b.region, cfg));
  out = keep.back().get();
  return out->run(b.tasks);
}

}  // namespace

TEST_CASE("a dependent diamond runs to completion with the oracle's result") {
  Built b = diamond_program();
  BlockState expected = oracle_serial_execute(b.tasks);
  for (int workers : {1, 2, 3}) {
    std::vector<std::unique_ptr<Simulation>> keep;
    Simulation* sim = nullptr;
    RunStats stats = run_once(b, workers, 0, sim, keep);
    CHECK(stats.tasks_spawned == 4);
    CHECK(stats.tasks_executed == 4);
    CHECK(stats.tasks_released == 4);
    CHECK(sim->final_state() == expected);
    CHECK(stats.total_time > 0);
  }
}

TEST_CASE("every task executes exactly once") {
  Built b = random_program(11, 300, 60);
  std::vector<std::unique_ptr<Simulation>> keep;
  Simulation* sim = nullptr;
  RunStats stats = run_once(b, 7, 0, sim, keep);
  CHECK(stats.tasks_executed == 300);
  std::set<std::uint64_t> seen;
  for (const TaskExecRecord& r : sim->exec_records()) {
    CHECK(seen.insert(r.task_id).second);
    CHECK(r.end >= r.start);
  }
  CHECK(seen.size() == 300);
}

TEST_CASE("slot transitions never leave the declared alphabet") {
  Built b = random_program(12, 200, 40);
  std::vector<std::unique_ptr<Simulation>> keep;
  Simulation* sim = nullptr;
  run_once(b, 5, 1500, sim, keep);
  REQUIRE(!sim->transitions().empty());
  for (const SlotTransition& t : sim->transitions()) {
    bool legal = (t.by_master && t.from == SlotState::Empty && t.to == SlotState::Ready) ||
                 (t.by_master && t.from == SlotState::Completed && t.to == SlotState::Ready) ||
                 (t.by_master && t.from == SlotState::Completed && t.to == SlotState::Empty) ||
                 (!t.by_master && t.from == SlotState::Ready && t.to == SlotState::Completed);
    CHECK(legal);
  }
}

TEST_CASE("write visibility delay changes timing but never results") {
  Built b = random_program(13, 150, 30);
  BlockState expected = oracle_serial_execute(b.tasks);
  SimTime t0 = 0;
  for (SimTime delay : {SimTime{0}, SimTime{20000}, SimTime{5000000}}) {
    std::vector<std::unique_ptr<Simulation>> keep;
    Simulation* sim = nullptr;
    RunStats stats = run_once(b, 7, delay, sim, keep);
    CHECK(sim->final_state() == expected);
    CHECK(stats.tasks_executed == 150);
    if (delay == 0) t0 = stats.total_time;
    // Hiding master writes longer can only slow the run down.
    CHECK(stats.total_time >= t0);
  }
}

TEST_CASE("per-core time buckets sum exactly to the elapsed time") {
  Built b = random_program(14, 250, 50);
  for (int workers : {1, 6, 43}) {
    std::vector<std::unique_ptr<Simulation>> keep;
    Simulation* sim = nullptr;
    RunStats stats = run_once(b, workers, 2000, sim, keep);
    CHECK(stats.master.total() == stats.total_time);
    REQUIRE(static_cast<int>(stats.workers.size()) == workers);
    for (const WorkerStats& w : stats.workers) {
      CHECK(w.accum.total() == stats.total_time);
    }
  }
}

TEST_CASE("a stalled worker is reported as a deadlock, not a hang") {
  Built b = diamond_program();
  Topology topo;
  Calibration cal;
  RuntimeConfig cfg;
  cfg.num_workers = 1;
  Simulation sim(topo, cal, *b.region, cfg);
  sim.stall_worker(0);
  CHECK_THROWS_WITH_AS(sim.run(b.tasks), doctest::Contains("deadlock"), SimulationFault);
}

TEST_CASE("a tiny descriptor pool forces flow control but still finishes") {
  Built b = random_program(15, 200, 40);
  BlockState expected = oracle_serial_execute(b.tasks);
  Topology topo;
  Calibration cal;
  RuntimeConfig cfg;
  cfg.num_workers = 4;
  cfg.pool_capacity = 8;
  Simulation sim(topo, cal, *b.region, cfg);
  RunStats stats = sim.run(b.tasks);
  CHECK(stats.tasks_executed == 200);
  CHECK(stats.tasks_released == 200);
  CHECK(sim.final_state() == expected);
}

TEST_CASE("independent tasks spread across all workers") {
  Calibration cal;
  Workload w = gen_blackscholes(65536, 512, AllocMode::Strided, cal);
  Topology topo;
  RuntimeConfig cfg;
  cfg.num_workers = 43;
  Simulation sim(topo, cal, *w.region, cfg);
  RunStats stats = sim.run(w.tasks);
  CHECK(stats.tasks_executed == 128);
  int with_work = 0;
  for (const WorkerStats& ws : stats.workers) with_work += ws.tasks_executed > 0;
  CHECK(with_work == 43);
}

TEST_CASE("a simulation instance runs only once") {
  Built b = diamond_program();
  Topology topo;
  Calibration cal;
  RuntimeConfig cfg;
  cfg.num_workers = 2;
  Simulation sim(topo, cal, *b.region, cfg);
  sim.run(b.tasks);
  CHECK_THROWS_AS(sim.run(b.tasks), SimulationFault);
}

TEST_CASE("run statistics serialize to json") {
  Built b = diamond_program();
  std::vector<std::unique_ptr<Simulation>> keep;
  Simulation* sim = nullptr;
  RunStats stats = run_once(b, 2, 0, sim, keep);
  std::string j = stats_to_json(stats);
  CHECK(j.find("total_time_ps") != std::string::npos);
  CHECK(j.find("tasks_executed") != std::string::npos);
}
