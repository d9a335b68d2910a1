#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sccsim/calibration.hpp"
#include "sccsim/engine.hpp"
#include "sccsim/topology.hpp"

namespace sccsim {

enum class FenceKind { L1Invalidate, L2Invalidate, L2Flush, WcbFlush };
enum class MemKind { Read, Write };
enum class Bucket { Idle, App, Flush, Overhead };

struct CoreAccum {
  SimTime idle = 0;
  SimTime app = 0;
  SimTime flush = 0;
  SimTime overhead = 0;

  SimTime total() const { return idle + app + flush + overhead; }
};

using MpbLine = std::array<std::uint8_t, 32>;

// One core's 8KB message-passing buffer: 256 whole-line slots. Writes may
// carry a visibility delay (an unflushed write-combine buffer); readers
// see the old contents until the delay elapses.
class MpbRegion {
 public:
  static constexpr int kLines = 256;

  MpbRegion() : lines_(kLines) {}

  void write(int line, const MpbLine& data, SimTime authored_at, SimTime visible_at,
             int author = -1);
  // Commits every pending write visible by `at`, then returns the line.
  const MpbLine& read(int line, SimTime at);
  // Like read(), but the viewer core also sees its own still-unflushed
  // writes (they sit in its write-combine buffer).
  MpbLine read_view(int line, SimTime at, int viewer);
  // Latest authored contents regardless of visibility (simulator-side peek).
  const MpbLine& peek_authoritative(int line) const;
  // Earliest time at which the latest authored write becomes readable.
  SimTime visible_at(int line) const;

 private:
  struct Pending {
    MpbLine data;
    SimTime visible_at;
    int author;
  };
  struct Line {
    MpbLine data{};
    std::vector<Pending> pending;
  };
  std::vector<Line> lines_;

  void commit(Line& l, SimTime at);
};

struct McQueue {
  SimTime busy_until = 0;
  std::uint64_t bytes_requested = 0;
  std::uint64_t bytes_serviced = 0;
  std::uint64_t transactions = 0;
};

struct TraceEvent {
  SimTime at;
  int core;
  std::string kind;
  SimTime duration;
};

// Timed hardware primitives shared by all agents: contended DRAM access
// through the four controllers, remote MPB line transfers, and cache
// fence costs. All calls are made from inside engine events, so arrival
// order at a controller is global timestamp order.
class Machine {
 public:
  Machine(const Topology& topo, const Calibration& cal);

  EventTimeline& timeline() { return timeline_; }
  const Topology& topology() const { return topo_; }
  const Calibration& calibration() const { return cal_; }

  SimTime mem_access(CoreId core, McId mc, std::uint64_t bytes, MemKind kind, SimTime at);
  SimTime mpb_write(CoreId src, CoreId dst_owner, int line, const MpbLine& payload,
                    SimTime at, SimTime visibility_delay = 0);
  std::pair<MpbLine, SimTime> mpb_read(CoreId src, CoreId dst_owner, int line, SimTime at);
  SimTime fence(CoreId core, FenceKind kind, SimTime at);

  MpbRegion& mpb(CoreId owner) { return mpbs_.at(owner.id); }
  const McQueue& mc_queue(McId mc) const { return mcs_.at(mc.id); }

  void charge(CoreId core, Bucket b, SimTime dur);
  const CoreAccum& accum(CoreId core) const { return accums_.at(core.id); }
  CoreAccum& accum_mut(CoreId core) { return accums_.at(core.id); }

  // Uncontended closed-form cost of one transaction (no queueing term).
  SimTime mem_access_closed_form(int mc_hops, std::uint64_t bytes) const;
  SimTime mpb_transfer_cost(int hops) const;
  SimTime fence_cost(FenceKind kind) const;

  void enable_trace(std::size_t cap = 1 << 20) { trace_enabled_ = true; trace_cap_ = cap; }
  const std::vector<TraceEvent>& trace() const { return trace_; }
  void record(int core, const std::string& kind, SimTime duration);
  void dump_trace_csv(const std::string& path) const;

 private:
  const Topology& topo_;
  Calibration cal_;
  EventTimeline timeline_;
  std::vector<MpbRegion> mpbs_;
  std::array<McQueue, Topology::kMcCount> mcs_;
  std::vector<CoreAccum> accums_;

  bool trace_enabled_ = false;
  std::size_t trace_cap_ = 0;
  std::vector<TraceEvent> trace_;
};

}  // namespace sccsim
