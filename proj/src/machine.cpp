#include "sccsim/machine.hpp"

#include <algorithm>
#include <fstream>

namespace sccsim {

void MpbRegion::commit(Line& l, SimTime at) {
  std::size_t n = 0;
  while (n < l.pending.size() && l.pending[n].visible_at <= at) ++n;
  if (n > 0) {
    l.data = l.pending[n - 1].data;
    l.pending.erase(l.pending.begin(), l.pending.begin() + static_cast<long>(n));
  }
}

void MpbRegion::write(int line, const MpbLine& data, SimTime authored_at, SimTime visible_at,
                      int author) {
  if (line < 0 || line >= kLines) throw SimulationFault("MPB line index out of range");
  Line& l = lines_[static_cast<std::size_t>(line)];
  commit(l, authored_at);
  if (visible_at <= authored_at) {
    // Immediately visible writes supersede anything still pending.
    l.data = data;
    l.pending.clear();
  } else {
    l.pending.push_back({data, visible_at, author});
  }
}

const MpbLine& MpbRegion::read(int line, SimTime at) {
  if (line < 0 || line >= kLines) throw SimulationFault("MPB line index out of range");
  Line& l = lines_[static_cast<std::size_t>(line)];
  commit(l, at);
  return l.data;
}

MpbLine MpbRegion::read_view(int line, SimTime at, int viewer) {
  if (line < 0 || line >= kLines) throw SimulationFault("MPB line index out of range");
  Line& l = lines_[static_cast<std::size_t>(line)];
  commit(l, at);
  for (auto it = l.pending.rbegin(); it != l.pending.rend(); ++it) {
    if (it->author == viewer) return it->data;
  }
  return l.data;
}

const MpbLine& MpbRegion::peek_authoritative(int line) const {
  const Line& l = lines_.at(static_cast<std::size_t>(line));
  if (!l.pending.empty()) return l.pending.back().data;
  return l.data;
}

SimTime MpbRegion::visible_at(int line) const {
  const Line& l = lines_.at(static_cast<std::size_t>(line));
  if (!l.pending.empty()) return l.pending.back().visible_at;
  return 0;
}

Machine::Machine(const Topology& topo, const Calibration& cal)
    : topo_(topo), cal_(cal), mpbs_(Topology::kCores), accums_(Topology::kCores) {}

SimTime Machine::mem_access_closed_form(int mc_hops, std::uint64_t bytes) const {
  std::int64_t lines = static_cast<std::int64_t>((bytes + 31) / 32);
  return cal_.mesh_ps(2 * mc_hops * cal_.mesh_hop_cycles) +
         cal_.mc_ps(lines * cal_.mc_service_cycles_per_line) +
         cal_.mc_ps(cal_.dram_base_cycles);
}

SimTime Machine::mem_access(CoreId core, McId mc, std::uint64_t bytes, MemKind kind, SimTime at) {
  if (bytes == 0) throw SimulationFault("mem_access with zero bytes");
  int hops = topo_.mc_distance(core, mc);
  SimTime arrival = at + cal_.mesh_ps(2 * hops * cal_.mesh_hop_cycles);
  std::int64_t lines = static_cast<std::int64_t>((bytes + 31) / 32);
  SimTime service = cal_.mc_ps(lines * cal_.mc_service_cycles_per_line);

  McQueue& q = mcs_.at(static_cast<std::size_t>(mc.id));
  q.bytes_requested += bytes;
  SimTime start = std::max(arrival, q.busy_until);
  q.busy_until = start + service;
  q.bytes_serviced += bytes;
  q.transactions++;
  (void)kind;
  return q.busy_until + cal_.mc_ps(cal_.dram_base_cycles);
}

SimTime Machine::mpb_transfer_cost(int hops) const {
  return cal_.mesh_ps(2 * hops * cal_.mesh_hop_cycles) + cal_.core_ps(cal_.mpb_access_cycles);
}

SimTime Machine::mpb_write(CoreId src, CoreId dst_owner, int line, const MpbLine& payload,
                           SimTime at, SimTime visibility_delay) {
  int hops = Topology::hop_distance(topo_.core_to_tile(src), topo_.core_to_tile(dst_owner));
  SimTime done = at + mpb_transfer_cost(hops);
  mpb(dst_owner).write(line, payload, done, done + visibility_delay, src.id);
  return done;
}

std::pair<MpbLine, SimTime> Machine::mpb_read(CoreId src, CoreId dst_owner, int line, SimTime at) {
  int hops = Topology::hop_distance(topo_.core_to_tile(src), topo_.core_to_tile(dst_owner));
  SimTime done = at + mpb_transfer_cost(hops);
  return {mpb(dst_owner).read(line, done), done};
}

SimTime Machine::fence_cost(FenceKind kind) const {
  switch (kind) {
    case FenceKind::L1Invalidate: return cal_.core_ps(cal_.l1_invalidate_cycles);
    case FenceKind::L2Invalidate: return cal_.core_ps(cal_.l2_invalidate_cycles);
    case FenceKind::L2Flush: return cal_.core_ps(cal_.l2_flush_cycles);
    case FenceKind::WcbFlush: return cal_.core_ps(cal_.wcb_flush_cycles);
  }
  return 0;
}

SimTime Machine::fence(CoreId core, FenceKind kind, SimTime at) {
  SimTime cost = fence_cost(kind);
  if (kind == FenceKind::L2Invalidate || kind == FenceKind::L2Flush) {
    charge(core, Bucket::Flush, cost);
  }
  return at + cost;
}

void Machine::charge(CoreId core, Bucket b, SimTime dur) {
  CoreAccum& a = accums_.at(static_cast<std::size_t>(core.id));
  switch (b) {
    case Bucket::Idle: a.idle += dur; break;
    case Bucket::App: a.app += dur; break;
    case Bucket::Flush: a.flush += dur; break;
    case Bucket::Overhead: a.overhead += dur; break;
  }
}

void Machine::record(int core, const std::string& kind, SimTime duration) {
  if (!trace_enabled_ || trace_.size() >= trace_cap_) return;
  trace_.push_back({timeline_.now(), core, kind, duration});
}

void Machine::dump_trace_csv(const std::string& path) const {
  std::ofstream out(path);
  out << "timestamp_ps,core,event,duration_ps\n";
  for (const TraceEvent& e : trace_) {
    out << e.at << "," << e.core << "," << e.kind << "," << e.duration << "\n";
  }
}

}  // namespace sccsim
