#include "sccsim/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sccsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected boolean, got '" + v + "'");
}

std::string fmt_speedup(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", s);
  return buf;
}

}  // namespace

std::vector<int> parse_worker_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t dots = item.find("..");
    std::size_t dash = item.find('-', 1);
    int lo, hi;
    if (dots != std::string::npos) {
      lo = std::stoi(item.substr(0, dots));
      hi = std::stoi(item.substr(dots + 2));
    } else if (dash != std::string::npos) {
      lo = std::stoi(item.substr(0, dash));
      hi = std::stoi(item.substr(dash + 1));
    } else {
      lo = hi = std::stoi(item);
    }
    if (lo > hi) throw ConfigError("empty worker range '" + item + "'");
    for (int w = lo; w <= hi; ++w) out.push_back(w);
  }
  if (out.empty()) throw ConfigError("empty worker list");
  for (int w : out) {
    if (w < 1 || w > Topology::kMaxWorkers)
      throw ConfigError("worker count " + std::to_string(w) + " outside 1..43");
  }
  return out;
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "workload") {
        cfg.workload = val;
      } else if (key == "full_scale") {
        cfg.full_scale = parse_bool(val);
      } else if (key == "workers") {
        cfg.workers = parse_worker_list(val);
      } else if (key == "alloc") {
        if (val == "contiguous") cfg.alloc_mode = AllocMode::Contiguous;
        else if (val == "strided") cfg.alloc_mode = AllocMode::Strided;
        else fail("alloc must be contiguous or strided");
      } else if (key == "seed") {
        cfg.seed = std::stoull(val);
        cfg.seed_set = true;
      } else if (key == "visibility_delay_ps") {
        cfg.visibility_delay = std::stoll(val);
      } else if (key == "calibration") {
        cfg.calibration_path = val;
      } else if (key == "out_dir") {
        cfg.out_dir = val;
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(std::string("bad value for '") + key + "': " + e.what());
    }
  }
  if (!cfg.seed_set) throw ConfigError(origin + ": missing mandatory key 'seed'");
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, path);
}

SimTime run_sequential_baseline(const Workload& w, const Topology& topo, const Calibration& cal) {
  Machine machine(topo, cal);
  TileCoord master = topo.core_to_tile(CoreId{Topology::kMasterCore});
  int nearest = topo.mc_distance(master, topo.nearest_mc(master));
  SimTime t = 0;
  std::uint32_t bs = w.region->block_bytes();
  for (const TaskDescriptor& task : w.tasks) {
    t += cal.core_ps(task.compute_cycles);
    for (const TaskArg& arg : task.args) {
      for (std::size_t i = 0; i < arg.blocks.size(); ++i) {
        std::uint64_t bytes = arg.bytes_of(i, bs);
        if (mode_reads(arg.mode)) t += machine.mem_access_closed_form(nearest, bytes);
        if (mode_writes(arg.mode)) t += machine.mem_access_closed_form(nearest, bytes);
      }
    }
  }
  return t;
}

RunResult run_point(const Workload& w, int workers, const Topology& topo, const Calibration& cal,
                    SimTime visibility_delay, SimTime baseline) {
  RuntimeConfig rc;
  rc.num_workers = workers;
  rc.visibility_delay = visibility_delay;
  rc.record_exec = false;
  rc.record_transitions = false;
  Simulation sim(topo, cal, *w.region, rc);
  RunResult r;
  r.workload = w.name;
  r.workers = workers;
  r.tasks = w.tasks.size();
  r.stats = sim.run(w.tasks);
  r.total = r.stats.total_time;
  r.baseline = baseline;
  r.speedup = static_cast<double>(baseline) / static_cast<double>(r.total);
  r.mc_hist = SharedRegion::mc_load_histogram(*w.region, w.data_blocks);
  return r;
}

std::string sweep_csv(const std::vector<RunResult>& results) {
  std::ostringstream os;
  os << "workload,workers,tasks,total_ps,baseline_ps,speedup\n";
  for (const RunResult& r : results) {
    os << r.workload << "," << r.workers << "," << r.tasks << "," << r.total << ","
       << r.baseline << "," << fmt_speedup(r.speedup) << "\n";
  }
  return os.str();
}

std::string sweep_json(const std::vector<RunResult>& results) {
  nlohmann::json j = nlohmann::json::array();
  for (const RunResult& r : results) {
    nlohmann::json e;
    e["workload"] = r.workload;
    e["workers"] = r.workers;
    e["tasks"] = r.tasks;
    e["total_ps"] = r.total;
    e["baseline_ps"] = r.baseline;
    e["speedup"] = fmt_speedup(r.speedup);
    e["mc_hist_bytes"] = r.mc_hist;
    e["mc_traffic_bytes"] = r.stats.mc_bytes;
    e["master"] = {{"idle", r.stats.master.idle},
                   {"app", r.stats.master.app},
                   {"flush", r.stats.master.flush},
                   {"overhead", r.stats.master.overhead}};
    nlohmann::json ws = nlohmann::json::array();
    for (const WorkerStats& s : r.stats.workers) {
      ws.push_back({{"core", s.core},
                    {"idle", s.accum.idle},
                    {"app", s.accum.app},
                    {"flush", s.accum.flush},
                    {"overhead", s.accum.overhead},
                    {"tasks", s.tasks_executed}});
    }
    e["workers_detail"] = std::move(ws);
    j.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::vector<RunResult> run_sweep(const ExperimentConfig& cfg) {
  Topology topo;
  Calibration cal =
      cfg.calibration_path.empty() ? Calibration{} : Calibration::load(cfg.calibration_path);

  std::vector<RunResult> results;
  SimTime baseline = 0;
  {
    Workload w0 = (cfg.workload == "random")
                      ? gen_random_graph(cfg.seed, 500, 100, cal)
                      : make_workload(cfg.workload, cfg.full_scale, cfg.alloc_mode, cal);
    baseline = run_sequential_baseline(w0, topo, cal);
  }
  for (int workers : cfg.workers) {
    // Fresh generation per point: each Simulation owns its machine state,
    // but regeneration keeps points fully independent.
    Workload w = (cfg.workload == "random")
                     ? gen_random_graph(cfg.seed, 500, 100, cal)
                     : make_workload(cfg.workload, cfg.full_scale, cfg.alloc_mode, cal);
    results.push_back(run_point(w, workers, topo, cal, cfg.visibility_delay, baseline));
  }

  std::filesystem::create_directories(cfg.out_dir);
  std::string stem = cfg.out_dir + "/" + cfg.workload + "_sweep";
  std::ofstream(stem + ".csv") << sweep_csv(results);
  std::ofstream(stem + ".json") << sweep_json(results);
  emit_breakdown(results, cfg.out_dir);
  return results;
}

void emit_breakdown(const std::vector<RunResult>& results, const std::string& out_dir) {
  if (results.empty()) throw ConfigError("emit_breakdown: no results");
  std::filesystem::create_directories(out_dir);
  const std::string& name = results.front().workload;

  std::ofstream cum(out_dir + "/" + name + "_breakdown.csv");
  cum << "workers,idle_ps,app_ps,flush_ps,overhead_ps\n";
  for (const RunResult& r : results) {
    CoreAccum sum;
    for (const WorkerStats& s : r.stats.workers) {
      sum.idle += s.accum.idle;
      sum.app += s.accum.app;
      sum.flush += s.accum.flush;
      sum.overhead += s.accum.overhead;
    }
    cum << r.workers << "," << sum.idle << "," << sum.app << "," << sum.flush << ","
        << sum.overhead << "\n";
  }

  const RunResult& top = *std::max_element(
      results.begin(), results.end(),
      [](const RunResult& a, const RunResult& b) { return a.workers < b.workers; });
  std::ofstream bal(out_dir + "/" + name + "_balance.csv");
  bal << "worker,core,idle_ps,app_ps,flush_ps,overhead_ps,tasks\n";
  for (std::size_t i = 0; i < top.stats.workers.size(); ++i) {
    const WorkerStats& s = top.stats.workers[i];
    bal << i << "," << s.core << "," << s.accum.idle << "," << s.accum.app << ","
        << s.accum.flush << "," << s.accum.overhead << "," << s.tasks_executed << "\n";
  }
}

std::vector<SimTime> run_stream_direct(const Workload& w, const Topology& topo,
                                       const Calibration& cal) {
  Machine machine(topo, cal);
  EventTimeline& tl = machine.timeline();
  std::uint32_t bs = w.region->block_bytes();

  struct Stream {
    CoreId core;
    std::vector<std::pair<McId, std::uint64_t>> xfers;  // (controller, bytes)
    std::size_t pos = 0;
    SimTime finish = 0;
  };
  std::vector<Stream> streams;
  for (const TaskDescriptor& t : w.tasks) {
    Stream s;
    s.core = CoreId{t.pinned_core};
    for (const TaskArg& arg : t.args) {
      for (std::size_t i = 0; i < arg.blocks.size(); ++i) {
        Block b = w.region->block(arg.blocks[i]);
        s.xfers.emplace_back(b.mc, arg.bytes_of(i, bs));
      }
    }
    streams.push_back(std::move(s));
  }

  std::function<void(std::size_t)> step = [&](std::size_t i) {
    Stream& s = streams[i];
    if (s.pos == s.xfers.size()) {
      s.finish = tl.now();
      return;
    }
    auto [mc, bytes] = s.xfers[s.pos++];
    SimTime done = machine.mem_access(s.core, mc, bytes, MemKind::Read, tl.now());
    tl.schedule_at(done, [&step, i] { step(i); });
  };
  for (std::size_t i = 0; i < streams.size(); ++i) tl.schedule_at(0, [&step, i] { step(i); });
  tl.run();

  std::vector<SimTime> out;
  for (const Stream& s : streams) out.push_back(s.finish);
  return out;
}

std::vector<SimTime> latency_curve(const Topology& topo, const Calibration& cal) {
  std::vector<SimTime> out;
  for (int hops = 1; hops <= 9; ++hops) {
    Workload w = gen_latency_microbench(hops, topo);
    out.push_back(run_stream_direct(w, topo, cal).front());
  }
  return out;
}

std::vector<SimTime> contention_curve(const Topology& topo, const Calibration& cal,
                                      int max_competitors) {
  std::vector<SimTime> out;
  for (int k = 0; k <= max_competitors; ++k) {
    Workload w = gen_contention_microbench(k, topo);
    out.push_back(run_stream_direct(w, topo, cal).front());
  }
  return out;
}

bool run_builtin_checks(std::ostream& os) {
  bool ok = true;
  auto report = [&](const std::string& name, bool pass) {
    os << (pass ? "PASS " : "FAIL ") << name << "\n";
    ok = ok && pass;
  };

  Topology topo;
  Calibration cal;
  Placement p = topo.build_placement(Topology::kMaxWorkers);
  PlacementMetrics m = topo.placement_metrics(p);
  report("placement integers",
         topo.core_to_tile(p.master) == TileCoord{2, 1} && m.nearest_mc_hops == 4 &&
             m.farthest_mc_hops == 5 && m.sum_mc_hops == 18 && m.sum_mpb_hops == 120 &&
             m.max_worker_hops == 5);

  std::vector<SimTime> lat = latency_curve(topo, cal);
  bool increasing = true;
  for (std::size_t i = 1; i < lat.size(); ++i) increasing = increasing && lat[i] > lat[i - 1];
  report("latency strictly increasing over hops 1..9", increasing);

  std::vector<SimTime> con = contention_curve(topo, cal, 10);
  bool nondec = true;
  for (std::size_t i = 1; i < con.size(); ++i) nondec = nondec && con[i] >= con[i - 1];
  report("contention non-decreasing over 0..10 competitors", nondec);
  report("contention slowdown at 10 competitors >= 2x",
         con.back() >= 2 * con.front());

  Workload bs = make_workload("blackscholes", false, AllocMode::Strided, cal);
  SimTime base = run_sequential_baseline(bs, topo, cal);
  RunResult r = run_point(bs, 8, topo, cal, 0, base);
  bool sums = true;
  for (const WorkerStats& s : r.stats.workers) sums = sums && s.accum.total() == r.total;
  report("breakdown buckets sum to elapsed time", sums);
  report("single run executes every task once", r.stats.tasks_executed == r.tasks);

  ExperimentConfig cfg;
  cfg.workload = "matmul";
  cfg.full_scale = false;
  cfg.workers = {1, 4, 8};
  cfg.seed = 1;
  cfg.seed_set = true;
  cfg.out_dir = std::filesystem::temp_directory_path() / "sccsim_check";
  std::string csv1 = sweep_csv(run_sweep(cfg));
  std::string csv2 = sweep_csv(run_sweep(cfg));
  report("sweep CSV deterministic for fixed seed", csv1 == csv2);

  return ok;
}

}  // namespace sccsim
