#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "sccsim/allocator.hpp"

using namespace sccsim;

TEST_CASE("geometry of the default region") {
  SharedRegion r;
  CHECK(r.total_bytes() == 512ull << 20);
  CHECK(r.block_bytes() == 4096);
  CHECK(r.num_blocks() == (512u << 20) / 4096u);
  CHECK(r.free_bytes() == r.total_bytes());
  // 16MB pages round-robin the four controllers.
  CHECK(r.page_mc(0) == McId{0});
  CHECK(r.page_mc(1) == McId{1});
  CHECK(r.page_mc(5) == McId{1});
  CHECK(r.block(0).mc == McId{0});
  CHECK(r.block((16u << 20) / 4096u).mc == McId{1});
}

TEST_CASE("contiguous allocation packs the lowest free blocks") {
  SharedRegion r;
  Allocation a = r.alloc(3 * 4096, AllocMode::Contiguous);
  CHECK(a.block_ids == std::vector<std::uint32_t>{0, 1, 2});
  Allocation b = r.alloc(4096, AllocMode::Contiguous);
  CHECK(b.block_ids == std::vector<std::uint32_t>{3});
  r.free(a);
  Allocation c = r.alloc(2 * 4096, AllocMode::Contiguous);
  CHECK(c.block_ids == std::vector<std::uint32_t>{0, 1});
}

TEST_CASE("a 16MB contiguous allocation lands on one controller") {
  SharedRegion r;
  Allocation a = r.alloc(16ull << 20, AllocMode::Contiguous);
  auto hist = SharedRegion::mc_load_histogram(r, a.block_ids);
  CHECK(hist[0] == 16ull << 20);
  CHECK(hist[1] + hist[2] + hist[3] == 0);
}

TEST_CASE("strided allocation balances controllers") {
  SharedRegion r;
  Allocation a = r.alloc(16ull << 20, AllocMode::Strided);
  auto hist = SharedRegion::mc_load_histogram(r, a.block_ids);
  auto [lo, hi] = std::minmax_element(hist.begin(), hist.end());
  CHECK(*hi - *lo <= r.block_bytes());
  // The cursor persists across allocations: many small allocations stay
  // balanced too.
  std::vector<std::uint32_t> blocks;
  for (int i = 0; i < 999; ++i) {
    Allocation s = r.alloc(4096, AllocMode::Strided);
    blocks.insert(blocks.end(), s.block_ids.begin(), s.block_ids.end());
  }
  auto h2 = SharedRegion::mc_load_histogram(r, blocks);
  auto [l2, m2] = std::minmax_element(h2.begin(), h2.end());
  CHECK(*m2 - *l2 <= r.block_bytes());
}

TEST_CASE("randomized alloc/free against an interval oracle") {
  SharedRegion r(64ull << 20, 16ull << 20, 4096);
  std::mt19937_64 rng(42);
  std::vector<Allocation> live;
  std::map<std::uint32_t, std::size_t> owner;  // block -> live index

  for (int step = 0; step < 4000; ++step) {
    bool do_alloc = live.empty() || (rng() % 3) != 0;
    if (do_alloc && r.free_bytes() >= 4096) {
      std::uint64_t bytes = 1 + rng() % (64 * 4096);
      if ((bytes + 4095) / 4096 * 4096 > r.free_bytes()) bytes = 4096;
      AllocMode mode = (rng() % 2) ? AllocMode::Strided : AllocMode::Contiguous;
      Allocation a = r.alloc(bytes, mode);
      CHECK(a.block_ids.size() == (bytes + 4095) / 4096);
      for (std::uint32_t id : a.block_ids) {
        // No block may belong to two live allocations.
        CHECK(!owner.contains(id));
        owner[id] = live.size();
      }
      live.push_back(a);
    } else if (!live.empty()) {
      std::size_t victim = rng() % live.size();
      for (std::uint32_t id : live[victim].block_ids) owner.erase(id);
      r.free(live[victim]);
      live[victim] = live.back();
      live.pop_back();
      for (auto& [id, idx] : owner) {
        if (idx == live.size()) idx = victim;
      }
    }
    CHECK(r.free_bytes() == (static_cast<std::uint64_t>(r.num_blocks()) - owner.size()) * 4096);
  }
}

TEST_CASE("logical ranges map back to the owning blocks") {
  SharedRegion r;
  Allocation a = r.alloc(10 * 4096, AllocMode::Strided);
  Allocation b = r.alloc(4 * 4096, AllocMode::Contiguous);

  auto ids = [](const std::vector<Block>& blocks) {
    std::vector<std::uint32_t> out;
    for (const Block& blk : blocks) out.push_back(blk.id);
    return out;
  };

  CHECK(ids(r.blocks_of_range(a.logical_base, 10 * 4096)) == a.block_ids);
  CHECK(ids(r.blocks_of_range(a.logical_base + 4096, 1)) ==
        std::vector<std::uint32_t>{a.block_ids[1]});
  CHECK(ids(r.blocks_of_range(a.logical_base + 4095, 2)) ==
        std::vector<std::uint32_t>{a.block_ids[0], a.block_ids[1]});
  CHECK(ids(r.blocks_of_range(b.logical_base + 2 * 4096 + 7, 4096)) ==
        std::vector<std::uint32_t>{b.block_ids[2], b.block_ids[3]});

  CHECK_THROWS_AS(r.blocks_of_range(a.logical_base, 0), DomainError);
  CHECK_THROWS_AS(r.blocks_of_range(b.logical_base + 4 * 4096, 1), DomainError);
}

TEST_CASE("error handling") {
  SharedRegion r(32ull << 20, 16ull << 20, 4096);
  CHECK_THROWS_AS(r.alloc(0, AllocMode::Contiguous), DomainError);
  CHECK_THROWS_AS(r.alloc(33ull << 20, AllocMode::Contiguous), DomainError);
  Allocation a = r.alloc(4096, AllocMode::Contiguous);
  r.free(a);
  CHECK_THROWS_AS(r.free(a), DomainError);
  CHECK_THROWS_AS(SharedRegion(32ull << 20, 16ull << 20, 3000), ConfigError);
  CHECK_THROWS_AS(SharedRegion(30ull << 20, 16ull << 20, 4096), ConfigError);
}
