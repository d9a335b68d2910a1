#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "sccsim/topology.hpp"

namespace sccsim {

struct Block {
  std::uint32_t id = 0;
  std::uint64_t base = 0;   // physical byte address within the region
  std::uint32_t size = 0;
  McId mc{};
};

enum class AllocMode { Contiguous, Strided };

struct Allocation {
  std::uint64_t logical_base = 0;
  std::uint64_t bytes = 0;
  std::vector<std::uint32_t> block_ids;  // in logical order
};

// Slab allocator over the simulated 512MB shared region. The region is a
// sequence of 16MB pages, each owned by one controller (round-robin), and
// carved into fixed power-of-two blocks. Strided allocations round-robin
// consecutive logical blocks across controllers; contiguous allocations
// pack into the lowest free addresses.
class SharedRegion {
 public:
  explicit SharedRegion(std::uint64_t total_bytes = 512ull << 20,
                        std::uint64_t page_bytes = 16ull << 20,
                        std::uint32_t block_bytes = 4096);

  std::uint32_t block_bytes() const { return block_bytes_; }
  std::uint64_t total_bytes() const { return total_bytes_; }
  std::uint32_t num_blocks() const { return num_blocks_; }
  std::uint64_t free_bytes() const;

  McId page_mc(std::uint32_t page) const;
  Block block(std::uint32_t id) const;

  Allocation alloc(std::uint64_t bytes, AllocMode mode);
  void free(const Allocation& a);

  // Minimal set of blocks overlapping [base, base+len) in the logical
  // address space handed out by alloc().
  std::vector<Block> blocks_of_range(std::uint64_t base, std::uint64_t len) const;

  static std::array<std::uint64_t, Topology::kMcCount> mc_load_histogram(
      const SharedRegion& region, const std::vector<std::uint32_t>& block_ids);

 private:
  std::uint64_t total_bytes_;
  std::uint64_t page_bytes_;
  std::uint32_t block_bytes_;
  std::uint32_t num_blocks_;
  std::uint32_t blocks_per_page_;

  std::set<std::uint32_t> free_all_;
  std::array<std::set<std::uint32_t>, Topology::kMcCount> free_by_mc_;
  int rr_mc_ = 0;

  std::uint64_t next_logical_ = 0;
  std::map<std::uint64_t, Allocation> allocations_;  // by logical_base

  std::uint32_t take(std::uint32_t id);
};

}  // namespace sccsim
