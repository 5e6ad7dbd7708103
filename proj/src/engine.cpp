#include "powerwatch/engine.hpp"

#include <algorithm>
#include <thread>

#include "powerwatch/errors.hpp"
#include "powerwatch/rng.hpp"

namespace powerwatch {

void seed_scores(ScoreStore& store, const std::vector<IpEntry>& entries) {
  for (const auto& e : entries) {
    if (e.blacklisted || store.records().contains(e.address)) continue;
    store.set(e.address, ScoreRecord{e.score, e.probe_count});
  }
}

Engine::Engine(EngineOptions opts, const std::vector<IpEntry>& entries, ScoreStore store,
               ProbeBackend& backend)
    : opts_(std::move(opts)),
      store_(std::move(store)),
      backend_(backend),
      rosters_(build_rosters(entries)),
      scheduler_(opts_.scheduler, opts_.warmup_ticks) {
  opts_.detector.validate();
  if (opts_.workers == 0) opts_.workers = 1;
  report_taus_ = opts_.detector.tau_report;
  if (report_taus_.empty()) report_taus_.push_back(opts_.detector.tau_gate);

  for (const auto& e : entries) {
    if (!e.blacklisted) isp_of_.emplace(e.address, e.isp);
  }
  for (const auto& [county, roster] : rosters_) {
    RegionState rs;
    rs.county = county;
    rs.period_value = opts_.scheduler.initial_period;
    regions_.emplace(county, rs);
    scheduler_.add_region(county);
    auto& tracks = tracks_[county];
    for (double tau : report_taus_) tracks.emplace_back(tau, opts_.detector.min_isp_samples);
  }
}

void Engine::emit(const EventRecord& r) {
  for (auto* o : observers_) o->on_event_record(r);
}

void Engine::warmup_scan(Tick tick) {
  for (const auto& [county, roster] : rosters_) {
    if (roster.members.empty()) continue;
    ProbeRequest req{roster.members, tick, opts_.probe_deadline};
    for (const auto& outcome : backend_.probe(req)) store_.update(outcome);
  }
}

void Engine::slow_scan(const County& county, Tick tick) {
  const auto& roster = rosters_.at(county);
  if (roster.members.empty()) return;
  ProbeRequest req{roster.members, tick, opts_.probe_deadline};
  auto outcomes = backend_.probe(req);
  // Regions currently held in a failure hypothesis keep their scores frozen,
  // slow scans included.
  if (regions_.at(county).hypothesis != Hypothesis::Normal) return;
  for (const auto& o : outcomes) store_.update(o);
}

void Engine::resize(const County& county) {
  auto& rs = regions_.at(county);
  const auto& roster = rosters_.at(county);
  rs.expected_rate = region_expected_rate(store_, roster.members);
  rs.watch_size = std::min(reliable_watch_size(rs.expected_rate), roster.members.size());
  rs.tracked = rs.watch_size > 0;
  if (!rs.tracked) rs.hypothesis = Hypothesis::Normal;
  scheduler_.set_tracked(county, rs.tracked);
  if (rs.tracked) tracked_ever_.insert(county);
  for (auto* o : observers_) o->on_resize(rs);
}

void Engine::run_fast_job(FastJob& job, Tick tick) const {
  const auto& roster = rosters_.at(job.county);
  const auto& rs = regions_.at(job.county);
  const auto seed = rng::mix(rng::subseed(opts_.seed, "sample", job.county),
                             static_cast<std::uint64_t>(tick));
  auto members = sample_reliable_watchlist(roster, store_, rs.watch_size, seed);

  ScanResult& r = job.result;
  r.county = job.county;
  r.tick = tick;
  r.kind = ScanKind::FastReliable;
  r.sampled_scores.reserve(members.size());
  r.isps.reserve(members.size());
  for (auto a : members) {
    r.sampled_scores.push_back(store_.score(a));
    r.isps.push_back(isp_of_.at(a));
  }
  r.outcomes = backend_.probe(ProbeRequest{std::move(members), tick, opts_.probe_deadline});
  job.assessment = assess_scan(r, opts_.detector);
}

void Engine::apply_fast_job(FastJob& job) {
  const auto& a = job.assessment;
  const bool update = gate_score_updates(a);
  if (update) {
    for (const auto& o : job.result.outcomes) store_.update(o);
  }
  auto& rs = regions_.at(job.county);
  if (!a.failure) {
    rs.hypothesis = Hypothesis::Normal;
  } else {
    rs.hypothesis = a.classification == Classification::Power ? Hypothesis::PowerOutage
                                                              : Hypothesis::Failure;
  }
  rs.period_value = scheduler_.on_assessment(job.county, a.failure);
  rs.counter = scheduler_.slot(job.county).counter;
  for (auto* o : observers_) o->on_assessment(a, update);

  for (auto& track : tracks_.at(job.county)) {
    auto tr = track.step(a);
    for (const auto& rec : records_for(tr, a, track.tau())) emit(rec);
    if (tr.kind == EventTransition::Kind::Close) closed_.push_back(*tr.event);
  }
}

void Engine::step(Tick tick) {
  if (last_tick_ && tick <= *last_tick_) {
    throw OrderingError("tick " + std::to_string(tick) + " is not after " +
                        std::to_string(*last_tick_));
  }
  last_tick_ = tick;

  if (tick < opts_.warmup_ticks) {
    warmup_scan(tick);
    return;
  }

  const auto commands = scheduler_.on_tick(tick);
  std::vector<County> slow;
  std::vector<FastJob> fast;
  for (const auto& cmd : commands) {
    for (auto* o : observers_) o->on_scan(cmd, tick);
    if (cmd.kind == ScanKind::SlowFull) {
      slow.push_back(cmd.county);
    } else {
      fast.push_back(FastJob{cmd.county, {}, {}});
    }
  }

  for (const auto& county : slow) slow_scan(county, tick);
  for (const auto& county : slow) resize(county);

  // A region can drop out of tracking on this tick's resize.
  std::erase_if(fast, [&](const FastJob& j) { return regions_.at(j.county).watch_size == 0; });

  const std::size_t workers = std::min(opts_.workers, fast.size());
  if (workers <= 1) {
    for (auto& job : fast) run_fast_job(job, tick);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = w; i < fast.size(); i += workers) run_fast_job(fast[i], tick);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::sort(fast.begin(), fast.end(),
            [](const FastJob& a, const FastJob& b) { return a.county < b.county; });
  for (auto& job : fast) apply_fast_job(job);
}

void Engine::run(Tick begin, Tick end) {
  for (Tick t = begin; t < end; ++t) step(t);
}

std::vector<OutageEvent> Engine::events(double tau) const {
  std::vector<OutageEvent> out;
  for (const auto& ev : closed_) {
    if (ev.tau == tau) out.push_back(ev);
  }
  for (const auto& [county, tracks] : tracks_) {
    for (const auto& t : tracks) {
      if (t.tau() == tau && t.open_event()) out.push_back(*t.open_event());
    }
  }
  std::sort(out.begin(), out.end(), [](const OutageEvent& a, const OutageEvent& b) {
    return std::tie(a.county, a.start_tick) < std::tie(b.county, b.start_tick);
  });
  return out;
}

}  // namespace powerwatch
