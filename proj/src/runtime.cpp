#include "sccsim/runtime.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "json.hpp"

namespace sccsim {

namespace {

MpbLine encode_state_line(SlotState st, std::uint64_t task_id) {
  MpbLine l{};
  l[0] = static_cast<std::uint8_t>(st);
  for (int i = 0; i < 8; ++i) l[1 + i] = static_cast<std::uint8_t>((task_id >> (8 * i)) & 0xff);
  return l;
}

SlotState decode_state(const MpbLine& l) {
  if (l[0] > 2) throw SimulationFault("malformed MPB slot payload");
  return static_cast<SlotState>(l[0]);
}

std::uint64_t decode_task_id(const MpbLine& l) {
  std::uint64_t id = 0;
  for (int i = 0; i < 8; ++i) id |= static_cast<std::uint64_t>(l[1 + i]) << (8 * i);
  return id;
}

}  // namespace

struct Simulation::Impl {
  const Topology& topo;
  Calibration cal;
  const SharedRegion& region;
  RuntimeConfig cfg;
  Machine machine;
  Placement placement;
  DependenceEngine deps;
  BlockState block_state;

  const std::vector<TaskDescriptor>* program = nullptr;

  enum class Mode { Running, PollingPool, Barrier };
  Mode mode = Mode::Running;
  std::size_t spawn_index = 0;
  std::deque<std::uint64_t> ready_queue;
  std::deque<std::uint64_t> completion_queue;
  std::size_t rr = 0;
  std::uint64_t released = 0;

  bool master_parked = false;
  SimTime master_park_start = 0;
  bool finished = false;
  bool ran = false;

  struct Worker {
    CoreId core{};
    int hops = 0;
    int capacity = 0;
    // master-local cursors
    int master_next = 0;
    int collect_next = 0;
    int outstanding = 0;
    // worker-local
    int worker_next = 0;
    bool parked = false;
    SimTime park_start = 0;
    bool stalled = false;
    std::uint64_t executed = 0;
    int max_outstanding = 0;
    SimTime poll_cost = 0;
  };
  std::vector<Worker> workers;  // placement order = ascending hops from master

  RunStats stats;
  std::vector<TaskExecRecord> exec_records;
  std::vector<SlotTransition> transitions;

  Impl(const Topology& t, const Calibration& c, const SharedRegion& r, RuntimeConfig cf)
      : topo(t), cal(c), region(r), cfg(cf), machine(t, c),
        placement(t.build_placement(cf.num_workers)), deps(cf.pool_capacity) {
    if (cfg.slot_lines < 1 || cfg.slot_lines > MpbRegion::kLines)
      throw ConfigError("slot_lines out of range");
    TileCoord mt = topo.core_to_tile(placement.master);
    SimTime p = machine.fence_cost(FenceKind::L1Invalidate) + machine.mpb_transfer_cost(0);
    for (CoreId w : placement.workers) {
      Worker wc;
      wc.core = w;
      wc.hops = Topology::hop_distance(mt, topo.core_to_tile(w));
      wc.capacity = MpbRegion::kLines / cfg.slot_lines;
      wc.poll_cost = p;
      workers.push_back(wc);
    }
  }

  CoreId master() const { return placement.master; }
  EventTimeline& tl() { return machine.timeline(); }
  int line0(const Worker& w, int slot) const {
    (void)w;
    return slot * cfg.slot_lines;
  }

  void note_transition(const Worker& w, int slot, SlotState from, SlotState to, bool by_master,
                       SimTime at) {
    if (!cfg.record_transitions) return;
    transitions.push_back({w.core.id, slot, from, to, by_master, at});
  }

  // ---- master side ---------------------------------------------------

  SimTime master_read_slot(Worker& w, int slot, SimTime t, SlotState& st, std::uint64_t& id) {
    t += machine.fence_cost(FenceKind::L1Invalidate);
    t += machine.mpb_transfer_cost(w.hops);
    MpbLine l = machine.mpb(w.core).read_view(line0(w, slot), t, master().id);
    st = decode_state(l);
    id = decode_task_id(l);
    return t;
  }

  MpbLine footprint_line(const TaskDescriptor& task) const {
    std::array<std::uint32_t, 8> counts{};  // read bytes per MC, then write bytes per MC
    for (const TaskArg& a : task.args) {
      for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        Block blk = region.block(a.blocks[i]);
        std::uint32_t n = a.bytes_of(i, blk.size);
        if (mode_reads(a.mode)) counts[static_cast<std::size_t>(blk.mc.id)] += n;
        if (mode_writes(a.mode)) counts[4 + static_cast<std::size_t>(blk.mc.id)] += n;
      }
    }
    MpbLine l{};
    for (int i = 0; i < 8; ++i)
      for (int byte = 0; byte < 4; ++byte)
        l[static_cast<std::size_t>(4 * i + byte)] =
            static_cast<std::uint8_t>((counts[static_cast<std::size_t>(i)] >> (8 * byte)) & 0xff);
    return l;
  }

  SimTime write_descriptor(Worker& w, int slot, TaskDescriptor* task, SimTime t, SlotState from) {
    if (cfg.slot_lines > 1) {
      t = machine.mpb_write(master(), w.core, line0(w, slot) + 1, footprint_line(*task), t,
                            cfg.visibility_delay);
    }
    t = machine.mpb_write(master(), w.core, line0(w, slot),
                          encode_state_line(SlotState::Ready, task->task_id), t,
                          cfg.visibility_delay);
    note_transition(w, slot, from, SlotState::Ready, true, t);
    task->state = TaskState::Scheduled;
    w.master_next = (slot + 1) % w.capacity;
    w.outstanding++;
    w.max_outstanding = std::max(w.max_outstanding, w.outstanding);
    maybe_wake_worker(w, slot, t + cfg.visibility_delay);
    t += cal.core_ps(cal.schedule_cycles);
    return t;
  }

  void maybe_wake_worker(Worker& w, int slot, SimTime visible) {
    if (!w.parked || w.stalled || slot != w.worker_next) return;
    // The worker polls in back-to-back iterations of length poll_cost; the
    // discovering iteration is the first whose read time reaches the
    // write's visibility point.
    SimTime p = w.poll_cost;
    SimTime d = w.park_start;
    SimTime v = std::max(visible, d);
    SimTime m = v > d + p ? (v - d - p + p - 1) / p : 0;
    SimTime start = std::max(d + m * p, tl().now());
    machine.charge(w.core, Bucket::Idle, start - d);
    w.parked = false;
    Worker* wp = &w;
    tl().schedule_at(start, [this, wp] { worker_poll(*wp); });
  }

  void collect_slot(Worker& w, int slot, std::uint64_t id) {
    if (slot != w.collect_next)
      throw SimulationFault("completion collected out of queue order");
    completion_queue.push_back(id);
    w.outstanding--;
    w.collect_next = (w.collect_next + 1) % w.capacity;
  }

  SimTime release_one(SimTime t) {
    std::uint64_t id = completion_queue.front();
    completion_queue.pop_front();
    TaskDescriptor* task = deps.find(id);
    if (!task || task->state != TaskState::Completed)
      throw SimulationFault("completion queue holds a task that is not Completed");
    std::size_t ndeps = task->dependents.size();
    for (std::uint64_t nid : deps.release_task(*task)) ready_queue.push_back(nid);
    released++;
    stats.tasks_released++;
    return t + cal.core_ps(cal.release_cycles +
                           cal.release_cycles_per_dependent * static_cast<std::int64_t>(ndeps));
  }

  void master_event() {
    if (finished) return;
    if (mode == Mode::Running) {
      master_spawn_step();
    } else {
      master_poll_round();
    }
  }

  void master_spawn_step() {
    if (spawn_index == program->size()) {
      mode = Mode::Barrier;
      master_poll_round();
      return;
    }
    const TaskDescriptor& spec = (*program)[spawn_index];
    if (!deps.pool_available()) {
      mode = Mode::PollingPool;
      master_poll_round();
      return;
    }
    SimTime t0 = tl().now();
    SimTime t = t0 + cal.core_ps(cal.spawn_cycles +
                                 cal.dep_cycles_per_block *
                                     static_cast<std::int64_t>(spec.footprint_blocks()));
    TaskDescriptor* task = deps.create_task(spec.fn_tag, spec.args, spec.compute_cycles,
                                            spec.pinned_core);
    assert(task && task->task_id == spec.task_id);
    deps.detect_dependencies(*task);
    spawn_index++;
    stats.tasks_spawned++;
    if (task->state == TaskState::Ready) t = try_enqueue_running(task, t);
    machine.charge(master(), Bucket::Overhead, t - t0);
    tl().schedule_at(t, [this] { master_event(); });
  }

  // Running mode: a single round-robin target; a full slot parks the task
  // in the local ready queue and the main program continues.
  SimTime try_enqueue_running(TaskDescriptor* task, SimTime t) {
    Worker& w = workers[rr];
    rr = (rr + 1) % workers.size();
    SlotState st;
    std::uint64_t id;
    t = master_read_slot(w, w.master_next, t, st, id);
    if (st == SlotState::Empty) {
      t = write_descriptor(w, w.master_next, task, t, SlotState::Empty);
    } else if (st == SlotState::Completed) {
      collect_slot(w, w.master_next, id);
      t = write_descriptor(w, w.master_next, task, t, SlotState::Completed);
    } else {
      ready_queue.push_back(task->task_id);
    }
    return t;
  }

  void master_poll_round() {
    SimTime t0 = tl().now();
    SimTime t = t0;
    bool progress = false;

    // (i) drain the ready queue, trying successive workers; when every
    // queue is full, release one completed task and retry.
    while (!ready_queue.empty()) {
      std::uint64_t tid = ready_queue.front();
      TaskDescriptor* task = deps.find(tid);
      assert(task && task->state == TaskState::Ready);
      bool scheduled = false;
      for (std::size_t i = 0; i < workers.size() && !scheduled; ++i) {
        Worker& w = workers[(rr + i) % workers.size()];
        SlotState st;
        std::uint64_t id;
        t = master_read_slot(w, w.master_next, t, st, id);
        if (st == SlotState::Empty) {
          t = write_descriptor(w, w.master_next, task, t, SlotState::Empty);
          scheduled = true;
        } else if (st == SlotState::Completed) {
          collect_slot(w, w.master_next, id);
          t = write_descriptor(w, w.master_next, task, t, SlotState::Completed);
          scheduled = true;
        }
      }
      if (scheduled) {
        rr = (rr + 1) % workers.size();
        ready_queue.pop_front();
        progress = true;
        continue;
      }
      if (!completion_queue.empty()) {
        t = release_one(t);
        progress = true;
        continue;
      }
      break;
    }

    // (ii) scan worker queues for completions, oldest outstanding first.
    for (Worker& w : workers) {
      if (w.outstanding == 0) continue;
      t += machine.fence_cost(FenceKind::L1Invalidate);
      while (w.outstanding > 0) {
        t += machine.mpb_transfer_cost(w.hops);
        MpbLine l = machine.mpb(w.core).read_view(line0(w, w.collect_next), t, master().id);
        if (decode_state(l) != SlotState::Completed) break;
        int slot = w.collect_next;
        collect_slot(w, slot, decode_task_id(l));
        t = machine.mpb_write(master(), w.core, line0(w, slot),
                              encode_state_line(SlotState::Empty, 0), t, cfg.visibility_delay);
        note_transition(w, slot, SlotState::Completed, SlotState::Empty, true, t);
        progress = true;
      }
    }

    // (iii) drain the completion queue, releasing dependencies.
    while (!completion_queue.empty()) {
      t = release_one(t);
      progress = true;
    }

    if (mode == Mode::PollingPool && deps.pool_available()) {
      machine.charge(master(), Bucket::Overhead, t - t0);
      mode = Mode::Running;
      tl().schedule_at(t, [this] { master_event(); });
      return;
    }
    if (mode == Mode::Barrier && released == stats.tasks_spawned) {
      machine.charge(master(), Bucket::Overhead, t - t0);
      finish(t);
      return;
    }
    if (progress) {
      machine.charge(master(), Bucket::Overhead, t - t0);
      tl().schedule_at(t, [this] { master_event(); });
    } else {
      machine.charge(master(), Bucket::Idle, t - t0);
      master_parked = true;
      master_park_start = t;
      // A completion may already be authored but still hidden behind the
      // worker's in-flight write-combine flush; self-wake at its
      // visibility point rather than relying on a wake that already
      // happened.
      SimTime next_visible = 0;
      for (Worker& w : workers) {
        if (w.outstanding == 0) continue;
        const MpbRegion& mpb = machine.mpb(w.core);
        int line = line0(w, w.collect_next);
        SimTime v = mpb.visible_at(line);
        if (v > t && decode_state(mpb.peek_authoritative(line)) == SlotState::Completed)
          next_visible = next_visible == 0 ? v : std::min(next_visible, v);
      }
      if (next_visible > 0) {
        wake_master(next_visible);
        return;
      }
      if (tl().pending() == 0) {
        std::ostringstream os;
        os << "deadlock: master idle at " << t << "ps with " << (stats.tasks_spawned - released)
           << " unreleased task(s), no pending events";
        dump_diag(os);
        throw SimulationFault(os.str());
      }
    }
  }

  void wake_master(SimTime at) {
    if (!master_parked || finished) return;
    master_parked = false;
    SimTime start = std::max(at, master_park_start);
    machine.charge(master(), Bucket::Idle, start - master_park_start);
    tl().schedule_at(start, [this] { master_event(); });
  }

  void dump_diag(std::ostringstream& os) {
    os << "\n  ready_queue=" << ready_queue.size()
       << " completion_queue=" << completion_queue.size();
    for (const Worker& w : workers) {
      os << "\n  worker core " << w.core.id << ": outstanding=" << w.outstanding
         << " executed=" << w.executed << (w.stalled ? " (stalled)" : "")
         << (w.parked ? " parked" : "");
    }
  }

  // ---- worker side ---------------------------------------------------

  struct ExecCtx {
    Worker* w;
    std::uint64_t task_id;
    int slot;
    std::uint64_t hash = 0;
    SimTime exec_start = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> reads;   // (block, bytes)
    std::vector<std::pair<std::uint32_t, std::uint32_t>> writes;
    std::size_t idx = 0;
  };

  void worker_poll(Worker& w) {
    if (finished || w.stalled) return;
    SimTime s = tl().now();
    SimTime p = w.poll_cost;
    SimTime d = s + p;
    int slot = w.worker_next;
    MpbLine l = machine.mpb(w.core).read_view(line0(w, slot), d, w.core.id);
    SlotState st = decode_state(l);
    if (st == SlotState::Ready) {
      machine.charge(w.core, Bucket::Overhead, p);
      begin_exec(w, decode_task_id(l), slot, d);
      return;
    }
    machine.charge(w.core, Bucket::Idle, p);
    // A write may already be authored but still hidden behind the
    // master's unflushed write-combine buffer; keep polling until it
    // becomes visible. Otherwise park until the master writes this slot.
    const MpbRegion& mpb = machine.mpb(w.core);
    SimTime v = mpb.visible_at(line0(w, slot));
    bool pending_ready = v > d && decode_state(mpb.peek_authoritative(line0(w, slot))) ==
                                      SlotState::Ready;
    if (pending_ready) {
      SimTime m = v > d + p ? (v - d - p + p - 1) / p : 0;
      SimTime start = d + m * p;
      machine.charge(w.core, Bucket::Idle, start - d);
      Worker* wp = &w;
      tl().schedule_at(start, [this, wp] { worker_poll(*wp); });
    } else {
      w.parked = true;
      w.park_start = d;
    }
  }

  void begin_exec(Worker& w, std::uint64_t task_id, int slot, SimTime t) {
    TaskDescriptor* task = deps.find(task_id);
    if (!task || task->state != TaskState::Scheduled)
      throw SimulationFault("worker dequeued a malformed or duplicate task descriptor");
    if (cfg.slot_lines > 1) {
      SimTime c = machine.mpb_transfer_cost(0);
      machine.mpb(w.core).read_view(line0(w, slot) + 1, t + c, w.core.id);
      machine.charge(w.core, Bucket::Overhead, c);
      t += c;
    }
    t = machine.fence(w.core, FenceKind::L2Invalidate, t);

    auto ctx = std::make_shared<ExecCtx>();
    ctx->w = &w;
    ctx->task_id = task_id;
    ctx->slot = slot;
    ctx->exec_start = t;
    ctx->hash = task_hash(*task, block_state);
    std::map<std::uint32_t, std::pair<std::uint64_t, std::uint64_t>> fp;  // block -> (r, w) bytes
    for (const TaskArg& a : task->args) {
      for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        std::uint32_t b = a.blocks[i];
        std::uint32_t n = a.bytes_of(i, region.block(b).size);
        auto& f = fp[b];
        if (mode_reads(a.mode)) f.first += n;
        if (mode_writes(a.mode)) f.second += n;
      }
    }
    for (auto& [b, rw] : fp) {
      std::uint32_t cap = region.block(b).size;
      if (rw.first > 0)
        ctx->reads.emplace_back(b, static_cast<std::uint32_t>(std::min<std::uint64_t>(rw.first, cap)));
      if (rw.second > 0)
        ctx->writes.emplace_back(b, static_cast<std::uint32_t>(std::min<std::uint64_t>(rw.second, cap)));
    }
    tl().schedule_at(t, [this, ctx] { exec_read_phase(ctx); });
  }

  void exec_read_phase(const std::shared_ptr<ExecCtx>& ctx) {
    Worker& w = *ctx->w;
    SimTime now = tl().now();
    if (ctx->idx < ctx->reads.size()) {
      auto [blk, bytes] = ctx->reads[ctx->idx++];
      Block b = region.block(blk);
      SimTime c = machine.mem_access(w.core, b.mc, bytes, MemKind::Read, now);
      machine.charge(w.core, Bucket::App, c - now);
      tl().schedule_at(c, [this, ctx] { exec_read_phase(ctx); });
      return;
    }
    TaskDescriptor* task = deps.find(ctx->task_id);
    SimTime compute = cal.core_ps(task->compute_cycles);
    machine.charge(w.core, Bucket::App, compute);
    ctx->idx = 0;
    tl().schedule_at(now + compute, [this, ctx] { exec_write_phase(ctx); });
  }

  void exec_write_phase(const std::shared_ptr<ExecCtx>& ctx) {
    Worker& w = *ctx->w;
    SimTime now = tl().now();
    if (ctx->idx < ctx->writes.size()) {
      auto [blk, bytes] = ctx->writes[ctx->idx++];
      Block b = region.block(blk);
      SimTime c = machine.mem_access(w.core, b.mc, bytes, MemKind::Write, now);
      machine.charge(w.core, Bucket::App, c - now);
      tl().schedule_at(c, [this, ctx] { exec_write_phase(ctx); });
      return;
    }
    finish_exec(ctx, now);
  }

  void finish_exec(const std::shared_ptr<ExecCtx>& ctx, SimTime t) {
    Worker& w = *ctx->w;
    TaskDescriptor* task = deps.find(ctx->task_id);
    commit_task(*task, ctx->hash, block_state);
    if (cfg.record_exec)
      exec_records.push_back({ctx->task_id, w.core.id, ctx->exec_start, t});

    t = machine.fence(w.core, FenceKind::L2Flush, t);

    SimTime write_done = t + machine.mpb_transfer_cost(0);
    SimTime wcb_done = write_done + machine.fence_cost(FenceKind::WcbFlush);
    machine.charge(w.core, Bucket::Overhead, wcb_done - t);
    machine.mpb(w.core).write(line0(w, ctx->slot),
                              encode_state_line(SlotState::Completed, ctx->task_id), write_done,
                              wcb_done, w.core.id);
    note_transition(w, ctx->slot, SlotState::Ready, SlotState::Completed, false, write_done);
    task->state = TaskState::Completed;
    w.executed++;
    stats.tasks_executed++;
    w.worker_next = (w.worker_next + 1) % w.capacity;

    wake_master(wcb_done);
    Worker* wp = &w;
    tl().schedule_at(wcb_done, [this, wp] { worker_poll(*wp); });
  }

  // ---- run -----------------------------------------------------------

  void finish(SimTime t) {
    finished = true;
    stats.total_time = t;
    for (Worker& w : workers) {
      // Charges cover the worker's timeline contiguously from zero; pad
      // whatever tail remains (parked, stalled, or a discarded poll
      // event) as idle time.
      // A positive gap is a discarded tail (parked, stalled, or an
      // abandoned poll event); a negative one is a poll that straddles
      // the barrier. Both are idle polling by construction.
      SimTime gap = t - machine.accum(w.core).total();
      machine.accum_mut(w.core).idle += gap;
      if (machine.accum(w.core).idle < 0)
        throw SimulationFault("worker idle accounting went negative at the barrier");
      w.parked = false;
      stats.workers.push_back({w.core.id, machine.accum(w.core), w.executed, w.max_outstanding});
    }
    stats.master = machine.accum(master());
    for (int m = 0; m < Topology::kMcCount; ++m)
      stats.mc_bytes[static_cast<std::size_t>(m)] = machine.mc_queue(McId{m}).bytes_serviced;
    tl().request_stop();
  }

  RunStats run(const std::vector<TaskDescriptor>& prog, BlockState initial) {
    if (ran) throw SimulationFault("Simulation::run may only be called once");
    ran = true;
    program = &prog;
    block_state = std::move(initial);
    for (Worker& w : workers) {
      Worker* wp = &w;
      tl().schedule_at(0, [this, wp] { worker_poll(*wp); });
    }
    tl().schedule_at(0, [this] { master_event(); });
    tl().run();
    if (!finished) {
      std::ostringstream os;
      os << "event set drained before barrier completion: spawned=" << stats.tasks_spawned
         << " executed=" << stats.tasks_executed << " released=" << released
         << " mode=" << static_cast<int>(mode) << " master_parked=" << master_parked;
      dump_diag(os);
      throw SimulationFault(os.str());
    }
    return stats;
  }
};

Simulation::Simulation(const Topology& topo, const Calibration& cal, const SharedRegion& region,
                       RuntimeConfig cfg)
    : impl_(std::make_unique<Impl>(topo, cal, region, cfg)) {}

Simulation::~Simulation() = default;

RunStats Simulation::run(const std::vector<TaskDescriptor>& program, BlockState initial) {
  return impl_->run(program, std::move(initial));
}

const BlockState& Simulation::final_state() const { return impl_->block_state; }
const std::vector<TaskExecRecord>& Simulation::exec_records() const { return impl_->exec_records; }
const std::vector<SlotTransition>& Simulation::transitions() const { return impl_->transitions; }
Machine& Simulation::machine() { return impl_->machine; }
const Placement& Simulation::placement() const { return impl_->placement; }

void Simulation::stall_worker(int nth) {
  impl_->workers.at(static_cast<std::size_t>(nth)).stalled = true;
}

std::string stats_to_json(const RunStats& stats) {
  nlohmann::json j;
  j["total_time_ps"] = stats.total_time;
  j["tasks_spawned"] = stats.tasks_spawned;
  j["tasks_executed"] = stats.tasks_executed;
  j["tasks_released"] = stats.tasks_released;
  j["master"] = {{"idle", stats.master.idle},
                 {"app", stats.master.app},
                 {"flush", stats.master.flush},
                 {"overhead", stats.master.overhead}};
  nlohmann::json ws = nlohmann::json::array();
  for (const WorkerStats& w : stats.workers) {
    ws.push_back({{"core", w.core},
                  {"idle", w.accum.idle},
                  {"app", w.accum.app},
                  {"flush", w.accum.flush},
                  {"overhead", w.accum.overhead},
                  {"tasks", w.tasks_executed},
                  {"max_outstanding", w.max_outstanding}});
  }
  j["workers"] = ws;
  j["mc_bytes"] = stats.mc_bytes;
  return j.dump(2);
}

}  // namespace sccsim
