#include "powerwatch/scheduler.hpp"

#include <algorithm>

#include "powerwatch/errors.hpp"

namespace powerwatch {

Scheduler::Scheduler(SchedulerConfig cfg, Tick origin)
    : cfg_(cfg), origin_(origin), slow_next_tick_(origin) {
  if (cfg_.slow_period <= 0 || cfg_.tick_quantum <= 0) {
    throw ConfigError("scheduler periods must be positive");
  }
  cfg_.initial_period = std::clamp(cfg_.initial_period, kMinPeriod, kMaxPeriod);
}

void Scheduler::add_region(const County& county) {
  slots_.try_emplace(county, Slot{cfg_.initial_period, cfg_.initial_period, false});
}

void Scheduler::set_tracked(const County& county, bool tracked) {
  auto it = slots_.find(county);
  if (it == slots_.end()) throw UnknownRegion(county);
  auto& s = it->second;
  if (tracked && !s.tracked) s.counter = s.period_value;
  s.tracked = tracked;
}

std::vector<ScanCommand> Scheduler::on_tick(Tick tick) {
  std::vector<ScanCommand> fresh;
  if (tick >= slow_next_tick_) {
    for (const auto& [county, slot] : slots_) fresh.push_back({county, ScanKind::SlowFull, tick});
    while (slow_next_tick_ <= tick) slow_next_tick_ += cfg_.slow_period;
  }
  if ((tick - origin_) % cfg_.tick_quantum == 0) {
    for (auto& [county, slot] : slots_) {
      if (!slot.tracked) continue;
      if (--slot.counter > 0) continue;
      fresh.push_back({county, ScanKind::FastReliable, tick});
      slot.counter = slot.period_value;
    }
  }

  if (cfg_.max_commands_per_tick == 0 && pending_.empty()) return fresh;

  // Rate-capped path: deferred commands go first; a region never has two
  // fast scans queued at once.
  for (auto& cmd : fresh) {
    const bool duplicate =
        cmd.kind == ScanKind::FastReliable &&
        std::any_of(pending_.begin(), pending_.end(), [&](const ScanCommand& p) {
          return p.kind == cmd.kind && p.county == cmd.county;
        });
    if (!duplicate) pending_.push_back(std::move(cmd));
  }
  std::vector<ScanCommand> out;
  const std::size_t cap = cfg_.max_commands_per_tick == 0 ? pending_.size()
                                                          : cfg_.max_commands_per_tick;
  while (!pending_.empty() && out.size() < cap) {
    out.push_back(std::move(pending_.front()));
    pending_.pop_front();
  }
  return out;
}

int Scheduler::on_assessment(const County& county, bool failure) {
  auto it = slots_.find(county);
  if (it == slots_.end()) throw UnknownRegion(county);
  auto& s = it->second;
  s.period_value = failure ? std::max(kMinPeriod, s.period_value - 1)
                           : std::min(kMaxPeriod, s.period_value + 1);
  s.counter = std::min(s.counter, s.period_value);
  return s.period_value;
}

const Scheduler::Slot& Scheduler::slot(const County& county) const {
  auto it = slots_.find(county);
  if (it == slots_.end()) throw UnknownRegion(county);
  return it->second;
}

}  // namespace powerwatch
