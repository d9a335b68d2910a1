#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <unordered_map>
#include <vector>

#include "sccsim/allocator.hpp"
#include "sccsim/topology.hpp"

namespace sccsim {

enum class AccessMode { In, Out, InOut };

inline bool mode_reads(AccessMode m) { return m == AccessMode::In || m == AccessMode::InOut; }
inline bool mode_writes(AccessMode m) { return m == AccessMode::Out || m == AccessMode::InOut; }

struct TaskArg {
  std::vector<std::uint32_t> blocks;
  // Actual bytes touched in each block; empty means the whole block.
  // Dependence analysis works on blocks; only traffic accounting uses this.
  std::vector<std::uint32_t> bytes;
  AccessMode mode = AccessMode::In;

  std::uint32_t bytes_of(std::size_t i, std::uint32_t block_size) const {
    return bytes.empty() ? block_size : bytes.at(i);
  }
};

enum class TaskState { Created, Waiting, Ready, Scheduled, Completed, Released };

struct TaskDescriptor {
  std::uint64_t task_id = 0;  // spawn order
  std::uint32_t fn_tag = 0;
  std::vector<TaskArg> args;
  std::uint32_t dep_count = 0;
  std::vector<std::uint64_t> dependents;
  TaskState state = TaskState::Created;
  std::int64_t compute_cycles = 0;
  int pinned_core = -1;

  std::uint64_t footprint_blocks() const;
};

struct BlockMeta {
  std::optional<std::uint64_t> last_writer;
  std::vector<std::uint64_t> readers_since_last_write;
};

// Abstract content of a block: a value updated by a deterministic hash of
// each writing task's inputs, and a version counting completed writers.
struct BlockContent {
  std::uint64_t value = 0;
  std::uint64_t version = 0;

  bool operator==(const BlockContent&) const = default;
};

using BlockState = std::map<std::uint32_t, BlockContent>;

// Task abstract semantics, shared by the sequential oracle and the
// simulated parallel execution: what a task computes is a hash of its tag,
// id, and the values it reads; every written block receives a per-block
// mix of that hash.
std::uint64_t task_hash(const TaskDescriptor& t, const BlockState& state);
void commit_task(const TaskDescriptor& t, std::uint64_t hash, BlockState& state);

// Block-level dynamic dependence analysis over a bounded descriptor pool.
class DependenceEngine {
 public:
  explicit DependenceEngine(std::size_t pool_capacity = 512);

  std::size_t pool_capacity() const { return capacity_; }
  std::size_t live_count() const { return live_.size(); }
  bool pool_available() const { return !free_.empty(); }

  // Returns nullptr when the pool is exhausted (a flow signal: the caller
  // polls until a descriptor is recycled).
  TaskDescriptor* create_task(std::uint32_t fn_tag, std::vector<TaskArg> args,
                              std::int64_t compute_cycles, int pinned_core = -1);

  std::uint32_t detect_dependencies(TaskDescriptor& task);
  std::vector<std::uint64_t> release_task(TaskDescriptor& task);

  TaskDescriptor* find(std::uint64_t task_id);

  void dump_dot(std::ostream& os) const;

 private:
  std::size_t capacity_;
  std::vector<TaskDescriptor> storage_;
  std::vector<std::size_t> free_;
  std::unordered_map<std::uint64_t, std::size_t> live_;  // task id -> slot
  std::unordered_map<std::uint32_t, BlockMeta> meta_;
  std::uint64_t next_task_id_ = 0;
};

// Independent correctness oracle: runs every task sequentially in spawn
// order over an abstract block state.
BlockState oracle_serial_execute(const std::vector<TaskDescriptor>& tasks,
                                 BlockState initial = {});

}  // namespace sccsim
