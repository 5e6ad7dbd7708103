#include <doctest.h>

#include <map>
#include <set>

#include "powerwatch/errors.hpp"
#include "powerwatch/rng.hpp"
#include "powerwatch/scheduler.hpp"

using namespace powerwatch;

namespace {

// Ticks at which `county` gets a fast scan, over [from, to).
std::vector<Tick> fast_ticks(Scheduler& s, const County& county, Tick from, Tick to) {
  std::vector<Tick> out;
  for (Tick t = from; t < to; ++t) {
    for (const auto& c : s.on_tick(t)) {
      if (c.county == county && c.kind == ScanKind::FastReliable) out.push_back(t);
    }
  }
  return out;
}

std::vector<Tick> diffs(const std::vector<Tick>& v) {
  std::vector<Tick> d;
  for (std::size_t i = 1; i < v.size(); ++i) d.push_back(v[i] - v[i - 1]);
  return d;
}

}  // namespace

TEST_CASE("quiet regions are scanned every 10 minutes") {
  Scheduler s;
  s.add_region("A");
  s.set_tracked("A", true);
  auto ticks = fast_ticks(s, "A", 0, 100);
  REQUIRE(ticks.size() >= 5);
  for (auto d : diffs(ticks)) CHECK(d == 10);
}

TEST_CASE("failing regions are scanned every 2 minutes") {
  SchedulerConfig cfg;
  cfg.initial_period = 1;
  Scheduler s(cfg);
  s.add_region("A");
  s.add_region("B");
  s.set_tracked("A", true);
  s.set_tracked("B", true);
  auto ticks = fast_ticks(s, "A", 0, 40);
  REQUIRE(ticks.size() >= 10);
  for (auto d : diffs(ticks)) CHECK(d == 2);
}

TEST_CASE("slow scans cover every region every 360 minutes") {
  Scheduler s({}, 720);
  s.add_region("A");
  s.add_region("B");
  s.set_tracked("A", true);
  std::map<Tick, std::set<County>> slow;
  for (Tick t = 720; t < 720 + 3 * 360 + 1; ++t) {
    for (const auto& c : s.on_tick(t)) {
      if (c.kind == ScanKind::SlowFull) slow[t].insert(c.county);
    }
  }
  REQUIRE(slow.size() == 4);
  Tick expect = 720;
  for (const auto& [t, counties] : slow) {
    CHECK(t == expect);
    CHECK(counties == std::set<County>{"A", "B"});
    expect += 360;
  }
}

TEST_CASE("untracked regions get no fast scans") {
  Scheduler s;
  s.add_region("A");
  CHECK(fast_ticks(s, "A", 1, 200).empty());
}

TEST_CASE("period value steps") {
  Scheduler s;
  s.add_region("A");
  CHECK(s.slot("A").period_value == 5);
  CHECK(s.on_assessment("A", true) == 4);
  CHECK(s.on_assessment("A", false) == 5);
  CHECK(s.on_assessment("A", false) == 5);
  for (int i = 0; i < 10; ++i) s.on_assessment("A", true);
  CHECK(s.on_assessment("A", true) == 1);
  s.on_assessment("A", false);
  s.on_assessment("A", false);
  CHECK(s.on_assessment("A", false) == 4);
  CHECK_THROWS_AS(s.on_assessment("Z", true), UnknownRegion);
  CHECK_THROWS_AS(s.slot("Z"), UnknownRegion);
  CHECK_THROWS_AS(s.set_tracked("Z", true), UnknownRegion);
}

TEST_CASE("interval shortens under failure and relaxes after recovery") {
  Scheduler s;
  s.add_region("A");
  s.set_tracked("A", true);
  std::vector<Tick> scans;
  for (Tick t = 1; t < 400; ++t) {
    for (const auto& c : s.on_tick(t)) {
      if (c.kind != ScanKind::FastReliable) continue;
      scans.push_back(t);
      s.on_assessment(c.county, scans.size() <= 4);
    }
  }
  auto d = diffs(scans);
  REQUIRE(d.size() >= 12);
  // four failures take the period from 10 minutes to 2
  CHECK(std::vector<Tick>(d.begin(), d.begin() + 4) == std::vector<Tick>{8, 6, 4, 2});
  // a longer period waits for the running countdown, then walks back to 10
  CHECK(std::vector<Tick>(d.begin() + 4, d.begin() + 9) == std::vector<Tick>{2, 4, 6, 8, 10});
  for (std::size_t i = 9; i < d.size(); ++i) CHECK(d[i] == 10);
}

TEST_CASE("property: counter and period stay in range") {
  rng::SplitMix g(4);
  Scheduler s;
  for (int i = 0; i < 6; ++i) s.add_region("R" + std::to_string(i));
  for (Tick t = 0; t < 3000; ++t) {
    if (g.below(50) == 0) s.set_tracked("R" + std::to_string(g.below(6)), g.below(2) == 1);
    for (const auto& c : s.on_tick(t)) {
      if (c.kind == ScanKind::FastReliable) s.on_assessment(c.county, g.below(3) == 0);
    }
    for (const auto& [county, slot] : s.slots()) {
      CHECK(slot.period_value >= kMinPeriod);
      CHECK(slot.period_value <= kMaxPeriod);
      if (slot.tracked) {
        CHECK(slot.counter >= 0);
        CHECK(slot.counter <= slot.period_value);
      }
    }
  }
}

TEST_CASE("rate cap defers commands in order without duplicating fast scans") {
  SchedulerConfig cfg;
  cfg.initial_period = 1;
  cfg.max_commands_per_tick = 2;
  Scheduler s(cfg);
  for (const char* c : {"A", "B", "C", "D"}) {
    s.add_region(c);
    s.set_tracked(c, true);
  }
  std::size_t total = 0;
  for (Tick t = 0; t < 40; ++t) {
    auto cmds = s.on_tick(t);
    CHECK(cmds.size() <= 2);
    total += cmds.size();
    std::set<std::pair<County, ScanKind>> seen;
    for (const auto& c : cmds) CHECK(seen.insert({c.county, c.kind}).second);
    CHECK(s.pending() <= 8);
  }
  CHECK(total == 80);
}
