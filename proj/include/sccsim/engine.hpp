#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "sccsim/calibration.hpp"

namespace sccsim {

// Deterministic event set: events dispatch in non-decreasing timestamp
// order, ties broken by insertion sequence.
class EventTimeline {
 public:
  using Fn = std::function<void()>;

  void schedule_at(SimTime at, Fn fn) {
    heap_.push(Ev{at, next_seq_++, std::move(fn)});
  }
  void schedule_in(SimTime dt, Fn fn) { schedule_at(now_ + dt, std::move(fn)); }

  SimTime now() const { return now_; }
  std::size_t pending() const { return heap_.size(); }

  bool step() {
    if (heap_.empty()) return false;
    Ev ev = heap_.top();
    heap_.pop();
    now_ = ev.at;
    ev.fn();
    return true;
  }

  void run() {
    while (step() && !stop_) {
    }
    stop_ = false;
  }

  // Stops the run loop after the current event; remaining events are
  // discarded by the caller going out of scope.
  void request_stop() { stop_ = true; }

 private:
  struct Ev {
    SimTime at;
    std::uint64_t seq;
    Fn fn;
  };
  struct Later {
    bool operator()(const Ev& a, const Ev& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Ev, std::vector<Ev>, Later> heap_;
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  bool stop_ = false;
};

}  // namespace sccsim
