#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sccsim/experiment.hpp"

using namespace sccsim;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("worker list parsing") {
  CHECK(parse_worker_list("1,2,4") == std::vector<int>{1, 2, 4});
  CHECK(parse_worker_list("5..8") == std::vector<int>{5, 6, 7, 8});
  CHECK(parse_worker_list("5-8") == std::vector<int>{5, 6, 7, 8});
  CHECK(parse_worker_list("1, 4..6, 43") == std::vector<int>{1, 4, 5, 6, 43});
  CHECK_THROWS_AS(parse_worker_list(""), ConfigError);
  CHECK_THROWS_AS(parse_worker_list("0"), ConfigError);
  CHECK_THROWS_AS(parse_worker_list("44"), ConfigError);
  CHECK_THROWS_AS(parse_worker_list("8..5"), ConfigError);
}

TEST_CASE("config parsing with line context") {
  std::istringstream good(
      "# comment\n"
      "workload = fft\n"
      "workers = 1,2\n"
      "full_scale = false\n"
      "alloc = contiguous\n"
      "seed = 99\n"
      "visibility_delay_ps = 1200\n"
      "out_dir = /tmp/x\n");
  ExperimentConfig cfg = parse_config(good, "inline");
  CHECK(cfg.workload == "fft");
  CHECK(cfg.workers == std::vector<int>{1, 2});
  CHECK(cfg.alloc_mode == AllocMode::Contiguous);
  CHECK(cfg.seed == 99);
  CHECK(cfg.visibility_delay == 1200);
  CHECK(cfg.out_dir == "/tmp/x");

  std::istringstream missing_seed("workload = fft\n");
  CHECK_THROWS_WITH_AS(parse_config(missing_seed, "cfg"), doctest::Contains("seed"),
                       ConfigError);

  std::istringstream bad_key("seed = 1\n\nbogus = 3\n");
  CHECK_THROWS_WITH_AS(parse_config(bad_key, "cfg"), doctest::Contains("cfg:3"), ConfigError);

  std::istringstream bad_value("seed = elephant\n");
  CHECK_THROWS_WITH_AS(parse_config(bad_value, "cfg"), doctest::Contains("cfg:1"), ConfigError);
}

TEST_CASE("sequential baseline equals the closed-form sum") {
  Topology topo;
  Calibration cal;
  Workload w;
  w.name = "stream";
  w.region = std::make_shared<SharedRegion>();
  Allocation a = w.region->alloc(3 * 4096, AllocMode::Contiguous);
  TaskDescriptor t;
  t.task_id = 0;
  t.fn_tag = 1;
  t.compute_cycles = 12345;
  TaskArg in;
  in.mode = AccessMode::In;
  in.blocks = a.block_ids;
  TaskArg out;
  out.mode = AccessMode::InOut;
  out.blocks = {a.block_ids[0]};
  out.bytes = {100};
  t.args = {in, out};
  w.tasks.push_back(t);

  Machine m(topo, cal);
  SimTime expect = cal.core_ps(12345);
  for (int i = 0; i < 3; ++i) expect += m.mem_access_closed_form(4, 4096);
  expect += 2 * m.mem_access_closed_form(4, 100);  // InOut: one read, one write
  CHECK(run_sequential_baseline(w, topo, cal) == expect);
}

TEST_CASE("speedup is defined as baseline over total") {
  ExperimentConfig cfg;
  cfg.workload = "blackscholes";
  cfg.workers = {1, 8};
  cfg.seed = 5;
  cfg.seed_set = true;
  cfg.out_dir = std::filesystem::temp_directory_path() / "sccsim_test_speedup";
  auto results = run_sweep(cfg);
  REQUIRE(results.size() == 2);
  for (const RunResult& r : results) {
    CHECK(r.speedup * static_cast<double>(r.total) ==
          doctest::Approx(static_cast<double>(r.baseline)).epsilon(1e-12));
    CHECK(r.baseline == results.front().baseline);  // worker count independent
  }
  CHECK(results[1].total < results[0].total);
}

TEST_CASE("sweep output is byte-identical across reruns") {
  ExperimentConfig cfg;
  cfg.workload = "cholesky";
  cfg.workers = {2, 5};
  cfg.seed = 7;
  cfg.seed_set = true;
  auto tmp = std::filesystem::temp_directory_path();
  cfg.out_dir = tmp / "sccsim_det_a";
  run_sweep(cfg);
  cfg.out_dir = tmp / "sccsim_det_b";
  run_sweep(cfg);
  for (const char* f : {"cholesky_sweep.csv", "cholesky_sweep.json", "cholesky_breakdown.csv",
                        "cholesky_balance.csv"}) {
    CHECK(slurp(tmp / "sccsim_det_a" / f) == slurp(tmp / "sccsim_det_b" / f));
  }
}

TEST_CASE("breakdown files account for every picosecond") {
  ExperimentConfig cfg;
  cfg.workload = "fft";
  cfg.workers = {3};
  cfg.seed = 9;
  cfg.seed_set = true;
  cfg.out_dir = std::filesystem::temp_directory_path() / "sccsim_test_bd";
  auto results = run_sweep(cfg);
  const RunResult& r = results.front();
  for (const WorkerStats& wst : r.stats.workers) {
    CHECK(wst.accum.total() == r.total);
  }
  std::string bal = slurp(std::filesystem::path(cfg.out_dir) / "fft_balance.csv");
  // worker,core,idle,app,flush,overhead,tasks rows sum to the elapsed time.
  std::istringstream lines(bal);
  std::string line;
  std::getline(lines, line);  // header
  int rows = 0;
  while (std::getline(lines, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    long long idx, core, idle, app, flush, ovh, tasks;
    fields >> idx >> core >> idle >> app >> flush >> ovh >> tasks;
    CHECK(idle + app + flush + ovh == r.total);
    rows++;
  }
  CHECK(rows == 3);
}

TEST_CASE("an unbatched reference stream matches the latency curve endpoint") {
  Topology topo;
  Calibration cal;
  std::vector<SimTime> lat = latency_curve(topo, cal);
  REQUIRE(lat.size() == 9);
  Workload ref = gen_contention_microbench(0, topo);
  CHECK(run_stream_direct(ref, topo, cal).front() == lat.back());
}
