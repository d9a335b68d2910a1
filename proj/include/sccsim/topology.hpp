#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sccsim {

// Geometry of the simulated chip: a 6x4 mesh of dual-core tiles with four
// memory controllers hanging off corner routers. All distances are router
// hop counts (Manhattan).

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimulationFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TileCoord {
  int x = 0;  // column, 0..5
  int y = 0;  // row, 0..3

  bool operator==(const TileCoord&) const = default;
};

struct CoreId {
  int id = 0;  // 0..47

  bool operator==(const CoreId&) const = default;
  auto operator<=>(const CoreId&) const = default;
};

struct McId {
  int id = 0;  // 0..3

  bool operator==(const McId&) const = default;
};

struct PlacementMetrics {
  int max_worker_hops = 0;
  int sum_mpb_hops = 0;   // master to every remote core's MPB, full chip
  int sum_mc_hops = 0;
  int nearest_mc_hops = 0;
  int farthest_mc_hops = 0;
};

struct Placement {
  CoreId master{};
  std::vector<CoreId> workers;  // ordered by (hops to master, core id)
  std::set<int> usable;         // core ids, size 44
};

class Topology {
 public:
  static constexpr int kWidth = 6;
  static constexpr int kHeight = 4;
  static constexpr int kTiles = kWidth * kHeight;
  static constexpr int kCores = 2 * kTiles;
  static constexpr int kMcCount = 4;
  static constexpr int kMasterCore = 16;
  static constexpr int kMaxWorkers = 43;

  Topology();

  // Geometry overrides for what-if layouts.
  void set_mc_attach(int mc, TileCoord t);
  void set_unusable(std::vector<int> core_ids);

  TileCoord core_to_tile(CoreId core) const;
  TileCoord mc_attach(McId mc) const { return mc_attach_.at(mc.id); }
  const std::vector<int>& unusable_cores() const { return unusable_; }

  static int hop_distance(TileCoord a, TileCoord b);
  // Router-to-router hops plus the link from the router to the controller.
  int mc_distance(TileCoord t, McId mc) const;
  int mc_distance(CoreId c, McId mc) const { return mc_distance(core_to_tile(c), mc); }

  McId nearest_mc(TileCoord t) const;

  Placement build_placement(int num_workers) const;
  PlacementMetrics placement_metrics(const Placement& p) const;

  // Sum of hops from tile m to all remote core MPBs (both cores of every
  // tile, the co-located partner core counting as zero).
  int mpb_hop_sum(TileCoord m) const;

 private:
  std::array<TileCoord, kMcCount> mc_attach_;
  std::vector<int> unusable_;
};

std::string placement_to_json(const Topology& topo, const Placement& p);

}  // namespace sccsim
