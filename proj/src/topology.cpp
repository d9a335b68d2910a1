#include "sccsim/topology.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "json.hpp"

namespace sccsim {

Topology::Topology() {
  // The four controllers sit on the corner routers of rows 0 and 2; one
  // extra link connects each router to its controller.
  mc_attach_ = {TileCoord{0, 0}, TileCoord{5, 0}, TileCoord{0, 2}, TileCoord{5, 2}};
  // Four cores lost to the crashed-kernel overlap. Chosen at distance 4
  // from the master tile, descending id, so small placements are never
  // perturbed and both distance-5 cores stay available.
  unusable_ = {45, 44, 37, 36};
}

void Topology::set_mc_attach(int mc, TileCoord t) {
  if (mc < 0 || mc >= kMcCount) throw ConfigError("mc index out of range");
  mc_attach_.at(mc) = t;
}

void Topology::set_unusable(std::vector<int> core_ids) {
  if (core_ids.size() != 4) throw ConfigError("exactly 4 unusable cores expected");
  for (int c : core_ids) {
    if (c < 0 || c >= kCores) throw ConfigError("unusable core id out of range");
    if (c == kMasterCore) throw ConfigError("master core cannot be unusable");
  }
  unusable_ = std::move(core_ids);
}

TileCoord Topology::core_to_tile(CoreId core) const {
  if (core.id < 0 || core.id >= kCores) throw DomainError("core id out of range");
  int tile = core.id / 2;
  return {tile % kWidth, tile / kWidth};
}

int Topology::hop_distance(TileCoord a, TileCoord b) {
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

int Topology::mc_distance(TileCoord t, McId mc) const {
  if (mc.id < 0 || mc.id >= kMcCount) throw DomainError("mc id out of range");
  return hop_distance(t, mc_attach_.at(mc.id)) + 1;
}

McId Topology::nearest_mc(TileCoord t) const {
  McId best{0};
  int best_d = mc_distance(t, best);
  for (int m = 1; m < kMcCount; ++m) {
    int d = mc_distance(t, McId{m});
    if (d < best_d) {
      best = McId{m};
      best_d = d;
    }
  }
  return best;
}

int Topology::mpb_hop_sum(TileCoord m) const {
  int sum = 0;
  for (int c = 0; c < kCores; ++c) {
    sum += hop_distance(m, core_to_tile(CoreId{c}));
  }
  // The loop counts the master's own MPB as zero hops, so no correction.
  return sum;
}

Placement Topology::build_placement(int num_workers) const {
  if (num_workers < 1 || num_workers > kMaxWorkers)
    throw ConfigError("num_workers must be in [1, 43]");

  Placement p;
  p.master = CoreId{kMasterCore};
  TileCoord master_tile = core_to_tile(p.master);

  for (int c = 0; c < kCores; ++c) p.usable.insert(c);
  for (int c : unusable_) p.usable.erase(c);

  std::vector<CoreId> candidates;
  for (int c : p.usable) {
    if (c != kMasterCore) candidates.push_back(CoreId{c});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](CoreId a, CoreId b) {
    int da = hop_distance(master_tile, core_to_tile(a));
    int db = hop_distance(master_tile, core_to_tile(b));
    if (da != db) return da < db;
    return a.id < b.id;
  });
  p.workers.assign(candidates.begin(), candidates.begin() + num_workers);
  return p;
}

PlacementMetrics Topology::placement_metrics(const Placement& p) const {
  PlacementMetrics m;
  TileCoord master_tile = core_to_tile(p.master);
  for (CoreId w : p.workers) {
    m.max_worker_hops = std::max(m.max_worker_hops, hop_distance(master_tile, core_to_tile(w)));
  }
  m.sum_mpb_hops = mpb_hop_sum(master_tile);
  m.nearest_mc_hops = mc_distance(master_tile, McId{0});
  m.farthest_mc_hops = m.nearest_mc_hops;
  for (int mc = 0; mc < kMcCount; ++mc) {
    int d = mc_distance(master_tile, McId{mc});
    m.sum_mc_hops += d;
    m.nearest_mc_hops = std::min(m.nearest_mc_hops, d);
    m.farthest_mc_hops = std::max(m.farthest_mc_hops, d);
  }
  return m;
}

std::string placement_to_json(const Topology& topo, const Placement& p) {
  nlohmann::json j;
  j["master"] = p.master.id;
  TileCoord mt = topo.core_to_tile(p.master);
  j["master_tile"] = {mt.x, mt.y};
  std::vector<int> workers;
  for (CoreId w : p.workers) workers.push_back(w.id);
  j["workers"] = workers;
  j["usable"] = std::vector<int>(p.usable.begin(), p.usable.end());
  PlacementMetrics m = topo.placement_metrics(p);
  j["metrics"] = {{"max_worker_hops", m.max_worker_hops},
                  {"sum_mpb_hops", m.sum_mpb_hops},
                  {"sum_mc_hops", m.sum_mc_hops},
                  {"nearest_mc_hops", m.nearest_mc_hops},
                  {"farthest_mc_hops", m.farthest_mc_hops}};
  return j.dump(2);
}

}  // namespace sccsim
