#pragma once

#include <deque>
#include <map>
#include <vector>

#include "powerwatch/model.hpp"

namespace powerwatch {

struct ScanCommand {
  County county;
  ScanKind kind = ScanKind::FastReliable;
  Tick tick = 0;  // tick the command was issued for (may precede emission when deferred)

  friend bool operator==(const ScanCommand&, const ScanCommand&) = default;
};

struct SchedulerConfig {
  Tick slow_period = 360;       // full residential scan cadence, minutes
  Tick tick_quantum = 2;        // counter decrements once per quantum
  int initial_period = 5;       // starting V for every region
  std::size_t max_commands_per_tick = 0;  // 0 = unlimited
};

inline constexpr int kMinPeriod = 1;
inline constexpr int kMaxPeriod = 5;

// Per-region scan timing. Each tracked region has a countdown that drops by
// one every quantum; at zero a fast scan is issued and the countdown is reset
// to the region's current period V (1..5 quanta, i.e. 2..10 minutes). V
// shortens after a failing assessment and lengthens after a healthy one.
class Scheduler {
 public:
  struct Slot {
    int counter = 0;
    int period_value = kMaxPeriod;
    bool tracked = false;
  };

  explicit Scheduler(SchedulerConfig cfg = {}, Tick origin = 0);

  void add_region(const County& county);
  // Entering tracked status restarts the countdown from V.
  void set_tracked(const County& county, bool tracked);

  std::vector<ScanCommand> on_tick(Tick tick);

  // Returns the new V. A running countdown longer than the new V is cut to
  // it. Throws UnknownRegion.
  int on_assessment(const County& county, bool failure);

  const Slot& slot(const County& county) const;
  const std::map<County, Slot>& slots() const { return slots_; }
  Tick slow_next_tick() const { return slow_next_tick_; }
  const SchedulerConfig& config() const { return cfg_; }
  std::size_t pending() const { return pending_.size(); }

 private:
  SchedulerConfig cfg_;
  Tick origin_;
  Tick slow_next_tick_;
  std::map<County, Slot> slots_;
  std::deque<ScanCommand> pending_;
};

}  // namespace powerwatch
