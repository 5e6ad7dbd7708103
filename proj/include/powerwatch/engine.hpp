#pragma once

#include <map>
#include <set>
#include <unordered_map>
#include <vector>

#include "powerwatch/detector.hpp"
#include "powerwatch/eventlog.hpp"
#include "powerwatch/model.hpp"
#include "powerwatch/prober.hpp"
#include "powerwatch/scheduler.hpp"
#include "powerwatch/scoring.hpp"
#include "powerwatch/watchlist.hpp"

namespace powerwatch {

struct EngineOptions {
  DetectorConfig detector;
  // Ticks [0, warmup_ticks) probe the whole residential watchlist every tick
  // to build converged scores; detection starts at warmup_ticks.
  Tick warmup_ticks = 720;
  SchedulerConfig scheduler;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  Tick probe_deadline = 1;
};

class EngineObserver {
 public:
  virtual ~EngineObserver() = default;
  virtual void on_scan(const ScanCommand& /*cmd*/, Tick /*tick*/) {}
  virtual void on_assessment(const ScanAssessment& /*a*/, bool /*scores_updated*/) {}
  virtual void on_event_record(const EventRecord& /*r*/) {}
  virtual void on_resize(const RegionState& /*region*/) {}
};

// The detection loop. One coordinator owns the score store and scheduler;
// fast scans of different regions within a tick can be sampled, probed and
// assessed concurrently, and their results are applied in county order so
// output does not depend on the worker count.
class Engine {
 public:
  Engine(EngineOptions opts, const std::vector<IpEntry>& entries, ScoreStore store,
         ProbeBackend& backend);

  void add_observer(EngineObserver* observer) { observers_.push_back(observer); }

  // Ticks must be processed in increasing order.
  void step(Tick tick);
  void run(Tick begin, Tick end);

  const ScoreStore& scores() const { return store_; }
  const std::map<County, RegionState>& regions() const { return regions_; }
  const std::map<County, RegionRoster>& rosters() const { return rosters_; }
  const Scheduler& scheduler() const { return scheduler_; }
  const std::set<County>& tracked_ever() const { return tracked_ever_; }
  const std::vector<double>& report_taus() const { return report_taus_; }

  // Closed and still-open events at one report threshold, by county then start.
  std::vector<OutageEvent> events(double tau) const;

 private:
  struct FastJob {
    County county;
    ScanResult result;
    ScanAssessment assessment;
  };

  void warmup_scan(Tick tick);
  void slow_scan(const County& county, Tick tick);
  void resize(const County& county);
  void run_fast_job(FastJob& job, Tick tick) const;
  void apply_fast_job(FastJob& job);
  void emit(const EventRecord& r);

  EngineOptions opts_;
  ScoreStore store_;
  ProbeBackend& backend_;
  std::map<County, RegionRoster> rosters_;
  std::unordered_map<Ipv4Address, std::string> isp_of_;
  std::map<County, RegionState> regions_;
  Scheduler scheduler_;
  std::vector<double> report_taus_;
  std::map<County, std::vector<EventTrack>> tracks_;
  std::vector<OutageEvent> closed_;
  std::set<County> tracked_ever_;
  std::vector<EngineObserver*> observers_;
  std::optional<Tick> last_tick_;
};

// Gives every entry without a stored record its initial score from the
// watchlist.
void seed_scores(ScoreStore& store, const std::vector<IpEntry>& entries);

}  // namespace powerwatch
