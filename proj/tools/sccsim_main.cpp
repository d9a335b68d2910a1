#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sccsim/experiment.hpp"

namespace {

int do_run(sccsim::ExperimentConfig cfg) {
  auto results = sccsim::run_sweep(cfg);
  std::cout << sccsim::sweep_csv(results);
  std::cerr << "wrote " << cfg.out_dir << "/" << cfg.workload
            << "_{sweep.csv,sweep.json,breakdown.csv,balance.csv}\n";
  return 0;
}

int do_placement() {
  sccsim::Topology topo;
  sccsim::Placement p = topo.build_placement(sccsim::Topology::kMaxWorkers);
  std::cout << sccsim::placement_to_json(topo, p) << "\n";
  return 0;
}

int do_microbench(const std::string& which, const std::string& out_dir,
                  const sccsim::Calibration& cal) {
  sccsim::Topology topo;
  std::filesystem::create_directories(out_dir);
  if (which == "latency" || which == "both") {
    std::vector<sccsim::SimTime> lat = sccsim::latency_curve(topo, cal);
    std::ofstream out(out_dir + "/latency.csv");
    out << "hops,time_ps\n";
    for (std::size_t i = 0; i < lat.size(); ++i) out << (i + 1) << "," << lat[i] << "\n";
    std::cerr << "wrote " << out_dir << "/latency.csv\n";
  }
  if (which == "contention" || which == "both") {
    std::vector<sccsim::SimTime> con = sccsim::contention_curve(topo, cal, 10);
    std::ofstream out(out_dir + "/contention.csv");
    out << "competitors,reference_time_ps\n";
    for (std::size_t i = 0; i < con.size(); ++i) out << i << "," << con[i] << "\n";
    std::cerr << "wrote " << out_dir << "/contention.csv\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sccsim: mesh-manycore task-runtime simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", workers_list, workload, calibration_path;
  std::uint64_t seed = 0;
  bool seed_given = false, full_scale = false;
  std::string bench_kind = "both";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--calibration", calibration_path, "calibration JSON path");
  };

  CLI::App* run = app.add_subcommand("run", "run a benchmark sweep");
  run->add_option("--config", config_path, "key=value config file");
  run->add_option("--seed", seed, "random seed")->each([&](const std::string&) { seed_given = true; });
  run->add_option("--workers", workers_list, "worker counts, e.g. 1,4..8,43");
  run->add_option("--workload", workload, "blackscholes|matmul|fft|jacobi|cholesky|random");
  run->add_flag("--full-scale", full_scale, "use full-size benchmark inputs");
  add_common(run);

  CLI::App* placement = app.add_subcommand("placement", "print placement metrics");

  CLI::App* micro = app.add_subcommand("microbench", "latency/contention curves");
  micro->add_option("--kind", bench_kind, "latency|contention|both");
  add_common(micro);

  CLI::App* check = app.add_subcommand("check", "built-in property suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      sccsim::ExperimentConfig cfg;
      if (!config_path.empty()) cfg = sccsim::parse_config_file(config_path);
      if (seed_given) {
        cfg.seed = seed;
        cfg.seed_set = true;
      }
      if (!workers_list.empty()) cfg.workers = sccsim::parse_worker_list(workers_list);
      if (!workload.empty()) cfg.workload = workload;
      if (full_scale) cfg.full_scale = true;
      if (!calibration_path.empty()) cfg.calibration_path = calibration_path;
      if (out_dir != ".") cfg.out_dir = out_dir;
      if (!cfg.seed_set) throw sccsim::ConfigError("a seed is required (--seed or config)");
      return do_run(std::move(cfg));
    }
    if (placement->parsed()) return do_placement();
    if (micro->parsed()) {
      sccsim::Calibration cal = calibration_path.empty()
                                    ? sccsim::Calibration{}
                                    : sccsim::Calibration::load(calibration_path);
      return do_microbench(bench_kind, out_dir, cal);
    }
    if (check->parsed()) return sccsim::run_builtin_checks(std::cout) ? 0 : 3;
  } catch (const sccsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const sccsim::SimulationFault& e) {
    std::cerr << "simulation fault: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
