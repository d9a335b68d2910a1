#include "sccsim/calibration.hpp"

#include <fstream>

#include "json.hpp"
#include "sccsim/topology.hpp"

namespace sccsim {

double Calibration::alpha_for(const std::string& kernel) const {
  auto it = alpha.find(kernel);
  if (it == alpha.end()) return 1.0;
  return it->second;
}

namespace {

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Calibration Calibration::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open calibration file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("calibration parse error in " + path + ": " + e.what());
  }

  Calibration c;
  get_if(j, "core_mhz", c.core_mhz);
  get_if(j, "mesh_mhz", c.mesh_mhz);
  get_if(j, "mc_mhz", c.mc_mhz);
  get_if(j, "mesh_hop_cycles", c.mesh_hop_cycles);
  get_if(j, "mpb_access_cycles", c.mpb_access_cycles);
  get_if(j, "mc_service_cycles_per_line", c.mc_service_cycles_per_line);
  get_if(j, "dram_base_cycles", c.dram_base_cycles);
  get_if(j, "l1_invalidate_cycles", c.l1_invalidate_cycles);
  get_if(j, "l2_invalidate_cycles", c.l2_invalidate_cycles);
  get_if(j, "l2_flush_cycles", c.l2_flush_cycles);
  get_if(j, "wcb_flush_cycles", c.wcb_flush_cycles);
  get_if(j, "spawn_cycles", c.spawn_cycles);
  get_if(j, "dep_cycles_per_block", c.dep_cycles_per_block);
  get_if(j, "release_cycles", c.release_cycles);
  get_if(j, "release_cycles_per_dependent", c.release_cycles_per_dependent);
  get_if(j, "schedule_cycles", c.schedule_cycles);
  if (j.contains("alpha")) {
    for (auto& [k, v] : j.at("alpha").items()) c.alpha[k] = v.get<double>();
  }

  if (c.core_mhz <= 0 || c.mesh_mhz <= 0 || c.mc_mhz <= 0)
    throw ConfigError("clock rates must be positive");
  return c;
}

void Calibration::save(const std::string& path) const {
  nlohmann::json j;
  j["core_mhz"] = core_mhz;
  j["mesh_mhz"] = mesh_mhz;
  j["mc_mhz"] = mc_mhz;
  j["mesh_hop_cycles"] = mesh_hop_cycles;
  j["mpb_access_cycles"] = mpb_access_cycles;
  j["mc_service_cycles_per_line"] = mc_service_cycles_per_line;
  j["dram_base_cycles"] = dram_base_cycles;
  j["l1_invalidate_cycles"] = l1_invalidate_cycles;
  j["l2_invalidate_cycles"] = l2_invalidate_cycles;
  j["l2_flush_cycles"] = l2_flush_cycles;
  j["wcb_flush_cycles"] = wcb_flush_cycles;
  j["spawn_cycles"] = spawn_cycles;
  j["dep_cycles_per_block"] = dep_cycles_per_block;
  j["release_cycles"] = release_cycles;
  j["release_cycles_per_dependent"] = release_cycles_per_dependent;
  j["schedule_cycles"] = schedule_cycles;
  j["alpha"] = alpha;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write calibration file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace sccsim
