#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "sccsim/topology.hpp"

using namespace sccsim;

TEST_CASE("master placement integers") {
  Topology topo;
  Placement p = topo.build_placement(Topology::kMaxWorkers);
  CHECK(p.master.id == 16);
  CHECK(topo.core_to_tile(p.master) == TileCoord{2, 1});

  PlacementMetrics m = topo.placement_metrics(p);
  CHECK(m.nearest_mc_hops == 4);
  CHECK(m.farthest_mc_hops == 5);
  CHECK(m.sum_mc_hops == 18);
  CHECK(m.sum_mpb_hops == 120);
  CHECK(m.max_worker_hops == 5);
  CHECK(p.usable.size() == 44);
  CHECK(p.workers.size() == 43);
}

TEST_CASE("per-controller distances from the master tile") {
  Topology topo;
  TileCoord mt = topo.core_to_tile(CoreId{Topology::kMasterCore});
  CHECK(topo.mc_distance(mt, McId{0}) == 4);
  CHECK(topo.mc_distance(mt, McId{1}) == 5);
  CHECK(topo.mc_distance(mt, McId{2}) == 4);
  CHECK(topo.mc_distance(mt, McId{3}) == 5);
  CHECK(topo.nearest_mc(mt) == McId{0});
}

TEST_CASE("contention reference core is 9 hops from controller 0") {
  Topology topo;
  int reference = -1;
  for (int c = 0; c < Topology::kCores && reference < 0; ++c) {
    if (topo.mc_distance(CoreId{c}, McId{0}) == 9) reference = c;
  }
  CHECK(reference == 46);
  CHECK(topo.core_to_tile(CoreId{46}) == TileCoord{5, 3});
  // 9 is the chip-wide maximum distance to controller 0.
  for (int c = 0; c < Topology::kCores; ++c) {
    CHECK(topo.mc_distance(CoreId{c}, McId{0}) <= 9);
  }
}

TEST_CASE("worker order is by distance then id, and prefixes nest") {
  Topology topo;
  Placement full = topo.build_placement(43);
  TileCoord mt = topo.core_to_tile(full.master);
  int prev = 0;
  for (CoreId w : full.workers) {
    int d = Topology::hop_distance(mt, topo.core_to_tile(w));
    CHECK(d >= prev);
    prev = d;
    CHECK(full.usable.contains(w.id));
    CHECK(w.id != full.master.id);
  }
  for (int k : {1, 7, 20}) {
    Placement small = topo.build_placement(k);
    REQUIRE(small.workers.size() == static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) CHECK(small.workers[i] == full.workers[i]);
  }
}

TEST_CASE("mpb hop sum is minimized exactly by the central tile class") {
  Topology topo;
  std::set<std::pair<int, int>> best_tiles;
  int best = -1;
  for (int y = 0; y < Topology::kHeight; ++y) {
    for (int x = 0; x < Topology::kWidth; ++x) {
      int s = topo.mpb_hop_sum(TileCoord{x, y});
      if (best < 0 || s < best) {
        best = s;
        best_tiles = {{x, y}};
      } else if (s == best) {
        best_tiles.insert({x, y});
      }
    }
  }
  CHECK(best == 120);
  CHECK(best_tiles == std::set<std::pair<int, int>>{{2, 1}, {2, 2}, {3, 1}, {3, 2}});
}

TEST_CASE("hop distance is a metric on the mesh") {
  for (int a = 0; a < Topology::kTiles; ++a) {
    TileCoord ta{a % 6, a / 6};
    CHECK(Topology::hop_distance(ta, ta) == 0);
    for (int b = 0; b < Topology::kTiles; ++b) {
      TileCoord tb{b % 6, b / 6};
      CHECK(Topology::hop_distance(ta, tb) == Topology::hop_distance(tb, ta));
      for (int c = 0; c < Topology::kTiles; ++c) {
        TileCoord tc{c % 6, c / 6};
        CHECK(Topology::hop_distance(ta, tc) <=
              Topology::hop_distance(ta, tb) + Topology::hop_distance(tb, tc));
      }
    }
  }
}

TEST_CASE("both cores of a tile map to the same coordinate") {
  Topology topo;
  for (int t = 0; t < Topology::kTiles; ++t) {
    CHECK(topo.core_to_tile(CoreId{2 * t}) == topo.core_to_tile(CoreId{2 * t + 1}));
  }
  CHECK(topo.core_to_tile(CoreId{0}) == TileCoord{0, 0});
  CHECK(topo.core_to_tile(CoreId{47}) == TileCoord{5, 3});
}

TEST_CASE("argument validation") {
  Topology topo;
  CHECK_THROWS_AS(topo.build_placement(0), ConfigError);
  CHECK_THROWS_AS(topo.build_placement(44), ConfigError);
  CHECK_THROWS_AS(topo.core_to_tile(CoreId{-1}), DomainError);
  CHECK_THROWS_AS(topo.core_to_tile(CoreId{48}), DomainError);
  CHECK_THROWS_AS(topo.set_unusable({1, 2, 3}), ConfigError);
  CHECK_THROWS_AS(topo.set_unusable({16, 1, 2, 3}), ConfigError);
}
