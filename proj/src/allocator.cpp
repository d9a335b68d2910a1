#include "sccsim/allocator.hpp"

#include <bit>

namespace sccsim {

SharedRegion::SharedRegion(std::uint64_t total_bytes, std::uint64_t page_bytes,
                           std::uint32_t block_bytes)
    : total_bytes_(total_bytes), page_bytes_(page_bytes), block_bytes_(block_bytes) {
  if (block_bytes_ == 0 || !std::has_single_bit(block_bytes_))
    throw ConfigError("block size must be a power of two");
  if (page_bytes_ % block_bytes_ != 0 || total_bytes_ % page_bytes_ != 0)
    throw ConfigError("region/page/block sizes must nest evenly");
  num_blocks_ = static_cast<std::uint32_t>(total_bytes_ / block_bytes_);
  blocks_per_page_ = static_cast<std::uint32_t>(page_bytes_ / block_bytes_);
  for (std::uint32_t id = 0; id < num_blocks_; ++id) {
    free_all_.insert(id);
    free_by_mc_[static_cast<std::size_t>(page_mc(id / blocks_per_page_).id)].insert(id);
  }
}

McId SharedRegion::page_mc(std::uint32_t page) const {
  return McId{static_cast<int>(page % Topology::kMcCount)};
}

Block SharedRegion::block(std::uint32_t id) const {
  if (id >= num_blocks_) throw DomainError("block id out of range");
  Block b;
  b.id = id;
  b.base = static_cast<std::uint64_t>(id) * block_bytes_;
  b.size = block_bytes_;
  b.mc = page_mc(id / blocks_per_page_);
  return b;
}

std::uint64_t SharedRegion::free_bytes() const {
  return static_cast<std::uint64_t>(free_all_.size()) * block_bytes_;
}

std::uint32_t SharedRegion::take(std::uint32_t id) {
  free_all_.erase(id);
  free_by_mc_[static_cast<std::size_t>(page_mc(id / blocks_per_page_).id)].erase(id);
  return id;
}

Allocation SharedRegion::alloc(std::uint64_t bytes, AllocMode mode) {
  if (bytes == 0) throw DomainError("alloc of zero bytes");
  std::uint64_t count = (bytes + block_bytes_ - 1) / block_bytes_;
  if (count > free_all_.size()) throw DomainError("out of shared memory");

  Allocation a;
  a.bytes = bytes;
  a.logical_base = next_logical_;
  a.block_ids.reserve(count);

  if (mode == AllocMode::Contiguous) {
    for (std::uint64_t i = 0; i < count; ++i) {
      a.block_ids.push_back(take(*free_all_.begin()));
    }
  } else {
    for (std::uint64_t i = 0; i < count; ++i) {
      // Next controller with a free block, continuing the global cursor.
      for (int tries = 0; tries < Topology::kMcCount; ++tries) {
        if (!free_by_mc_[static_cast<std::size_t>(rr_mc_)].empty()) break;
        rr_mc_ = (rr_mc_ + 1) % Topology::kMcCount;
      }
      auto& pool = free_by_mc_[static_cast<std::size_t>(rr_mc_)];
      a.block_ids.push_back(take(*pool.begin()));
      rr_mc_ = (rr_mc_ + 1) % Topology::kMcCount;
    }
  }

  next_logical_ += count * block_bytes_;
  allocations_[a.logical_base] = a;
  return a;
}

void SharedRegion::free(const Allocation& a) {
  auto it = allocations_.find(a.logical_base);
  if (it == allocations_.end()) throw DomainError("free of unknown or already-freed allocation");
  for (std::uint32_t id : it->second.block_ids) {
    if (free_all_.contains(id)) throw DomainError("double free of block");
    free_all_.insert(id);
    free_by_mc_[static_cast<std::size_t>(page_mc(id / blocks_per_page_).id)].insert(id);
  }
  allocations_.erase(it);
}

std::vector<Block> SharedRegion::blocks_of_range(std::uint64_t base, std::uint64_t len) const {
  if (len == 0) throw DomainError("empty range");
  auto it = allocations_.upper_bound(base);
  if (it == allocations_.begin()) throw DomainError("range not in allocated space");
  --it;
  const Allocation& a = it->second;
  std::uint64_t span = static_cast<std::uint64_t>(a.block_ids.size()) * block_bytes_;
  if (base + len > a.logical_base + span) throw DomainError("range not in allocated space");

  std::uint64_t off = base - a.logical_base;
  std::uint64_t first = off / block_bytes_;
  std::uint64_t last = (off + len - 1) / block_bytes_;
  std::vector<Block> out;
  out.reserve(last - first + 1);
  for (std::uint64_t i = first; i <= last; ++i) {
    out.push_back(block(a.block_ids[static_cast<std::size_t>(i)]));
  }
  return out;
}

std::array<std::uint64_t, Topology::kMcCount> SharedRegion::mc_load_histogram(
    const SharedRegion& region, const std::vector<std::uint32_t>& block_ids) {
  std::array<std::uint64_t, Topology::kMcCount> hist{};
  for (std::uint32_t id : block_ids) {
    Block b = region.block(id);
    hist[static_cast<std::size_t>(b.mc.id)] += b.size;
  }
  return hist;
}

}  // namespace sccsim
