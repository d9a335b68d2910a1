#include "sccsim/depengine.hpp"

#include <algorithm>
#include <cassert>

namespace sccsim {

std::uint64_t TaskDescriptor::footprint_blocks() const {
  std::uint64_t n = 0;
  for (const TaskArg& a : args) n += a.blocks.size();
  return n;
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

std::uint64_t task_hash(const TaskDescriptor& t, const BlockState& state) {
  std::uint64_t h = kFnvOffset;
  h = fnv_mix(h, t.fn_tag);
  h = fnv_mix(h, t.task_id);
  for (const TaskArg& a : t.args) {
    if (!mode_reads(a.mode)) continue;
    for (std::uint32_t b : a.blocks) {
      auto it = state.find(b);
      h = fnv_mix(h, it == state.end() ? 0 : it->second.value);
    }
  }
  return h;
}

void commit_task(const TaskDescriptor& t, std::uint64_t hash, BlockState& state) {
  for (const TaskArg& a : t.args) {
    if (!mode_writes(a.mode)) continue;
    for (std::uint32_t b : a.blocks) {
      BlockContent& c = state[b];
      c.value = fnv_mix(hash, b);
      c.version++;
    }
  }
}

BlockState oracle_serial_execute(const std::vector<TaskDescriptor>& tasks, BlockState initial) {
  BlockState state = std::move(initial);
  for (const TaskDescriptor& t : tasks) {
    commit_task(t, task_hash(t, state), state);
  }
  return state;
}

DependenceEngine::DependenceEngine(std::size_t pool_capacity)
    : capacity_(pool_capacity), storage_(pool_capacity) {
  if (pool_capacity == 0) throw ConfigError("descriptor pool capacity must be positive");
  for (std::size_t i = pool_capacity; i-- > 0;) free_.push_back(i);
}

TaskDescriptor* DependenceEngine::create_task(std::uint32_t fn_tag, std::vector<TaskArg> args,
                                              std::int64_t compute_cycles, int pinned_core) {
  if (free_.empty()) return nullptr;
  std::size_t slot = free_.back();
  free_.pop_back();
  TaskDescriptor& t = storage_[slot];
  t = TaskDescriptor{};
  t.task_id = next_task_id_++;
  t.fn_tag = fn_tag;
  t.args = std::move(args);
  t.compute_cycles = compute_cycles;
  t.pinned_core = pinned_core;
  t.state = TaskState::Created;
  live_.emplace(t.task_id, slot);
  return &t;
}

TaskDescriptor* DependenceEngine::find(std::uint64_t task_id) {
  auto it = live_.find(task_id);
  if (it == live_.end()) return nullptr;
  return &storage_[it->second];
}

std::uint32_t DependenceEngine::detect_dependencies(TaskDescriptor& task) {
  assert(task.state == TaskState::Created);

  // Collapse the footprint to one effective access per block.
  std::map<std::uint32_t, std::pair<bool, bool>> footprint;  // block -> (reads, writes)
  for (const TaskArg& a : task.args) {
    for (std::uint32_t b : a.blocks) {
      auto& f = footprint[b];
      f.first |= mode_reads(a.mode);
      f.second |= mode_writes(a.mode);
    }
  }

  // A predecessor only blocks this task while it has not completed:
  // lazy release must not serialize against already-finished work.
  auto blocking = [&](std::uint64_t id) -> TaskDescriptor* {
    TaskDescriptor* p = find(id);
    if (!p || p->task_id == task.task_id) return nullptr;
    if (p->state == TaskState::Completed || p->state == TaskState::Released) return nullptr;
    return p;
  };

  std::set<std::uint64_t> preds;
  for (auto& [block, access] : footprint) {
    BlockMeta& m = meta_[block];
    auto [reads, writes] = access;
    if (m.last_writer && blocking(*m.last_writer)) preds.insert(*m.last_writer);
    if (writes) {
      for (std::uint64_t r : m.readers_since_last_write) {
        if (blocking(r)) preds.insert(r);
      }
      m.last_writer = task.task_id;
      m.readers_since_last_write.clear();
    } else {
      if (std::find(m.readers_since_last_write.begin(), m.readers_since_last_write.end(),
                    task.task_id) == m.readers_since_last_write.end()) {
        m.readers_since_last_write.push_back(task.task_id);
      }
    }
  }

  for (std::uint64_t p : preds) {
    find(p)->dependents.push_back(task.task_id);
  }
  task.dep_count = static_cast<std::uint32_t>(preds.size());
  task.state = task.dep_count == 0 ? TaskState::Ready : TaskState::Waiting;
  return task.dep_count;
}

std::vector<std::uint64_t> DependenceEngine::release_task(TaskDescriptor& task) {
  if (task.state != TaskState::Completed)
    throw SimulationFault("release of a task that is not Completed");

  std::vector<std::uint64_t> newly_ready;
  for (std::uint64_t d : task.dependents) {
    TaskDescriptor* dep = find(d);
    if (!dep) continue;
    assert(dep->dep_count > 0);
    if (--dep->dep_count == 0 && dep->state == TaskState::Waiting) {
      dep->state = TaskState::Ready;
      newly_ready.push_back(d);
    }
  }
  task.state = TaskState::Released;

  auto it = live_.find(task.task_id);
  free_.push_back(it->second);
  live_.erase(it);
  return newly_ready;
}

void DependenceEngine::dump_dot(std::ostream& os) const {
  os << "digraph deps {\n";
  std::map<std::uint64_t, const TaskDescriptor*> ordered;
  for (auto& [id, slot] : live_) ordered[id] = &storage_[slot];
  for (auto& [id, t] : ordered) {
    os << "  t" << id << " [label=\"T" << id << " fn" << t->fn_tag << " dep"
       << t->dep_count << "\"];\n";
    for (std::uint64_t d : t->dependents) {
      os << "  t" << id << " -> t" << d << ";\n";
    }
  }
  os << "}\n";
}

}  // namespace sccsim
