#include "powerwatch/app.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <thread>

#include "powerwatch/engine.hpp"
#include "powerwatch/errors.hpp"
#include "powerwatch/eventlog.hpp"
#include "powerwatch/scenario.hpp"
#include "powerwatch/snapshot.hpp"
#include "powerwatch/text.hpp"
#include "powerwatch/watchlist.hpp"

namespace powerwatch {

namespace fs = std::filesystem;

namespace {

constexpr Tick kTruthCadence = 10;

class EventLogWriter : public EngineObserver {
 public:
  EventLogWriter(const fs::path& path, bool append) : log_(path, append) {}
  void on_event_record(const EventRecord& r) override { log_.write(r); }
  void flush() { log_.flush(); }

 private:
  EventLog log_;
};

class AssessmentWriter : public EngineObserver {
 public:
  AssessmentWriter(const fs::path& path, bool append)
      : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw Error("cannot write " + path.string());
    if (!append || fs::file_size(path) == 0) {
      out_ << "tick,county,watch_size,actual,expected,gap,failure,classification,scores_updated\n";
    }
  }
  void on_assessment(const ScanAssessment& a, bool updated) override {
    out_ << a.tick << ',' << a.county << ',' << a.watch_size << ',' << text::fixed(a.actual_up, 6)
         << ',' << text::fixed(a.expected_up, 6) << ',' << text::fixed(a.gap, 6) << ','
         << (a.failure ? 1 : 0) << ',' << to_string(a.classification) << ',' << (updated ? 1 : 0)
         << '\n';
  }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

EngineOptions engine_options(const RunConfig& cfg) {
  EngineOptions o;
  o.detector = cfg.detector;
  o.warmup_ticks = cfg.warmup_ticks;
  o.scheduler.slow_period = cfg.slow_period_minutes;
  o.scheduler.max_commands_per_tick = cfg.max_commands_per_tick;
  o.seed = cfg.seed;
  o.workers = cfg.workers;
  return o;
}

ScoreStore initial_store(const RunConfig& cfg, const fs::path& fallback_snapshot = {}) {
  if (!cfg.restore_scores_path.empty()) {
    return restore_scores(cfg.restore_scores_path, cfg.alpha, cfg.initial_score);
  }
  if (!fallback_snapshot.empty() && fs::exists(fallback_snapshot)) {
    return restore_scores(fallback_snapshot, cfg.alpha, cfg.initial_score);
  }
  return ScoreStore(cfg.alpha, cfg.initial_score);
}

void write_county_list(const fs::path& path, const std::set<County>& counties) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& c : counties) out << c << '\n';
}

void log_watchlist(std::ostream& log, const WatchlistReport& r) {
  log << "watchlist: " << r.entries.size() << " entries, " << r.duplicates_removed
      << " duplicates removed, " << r.blacklisted << " blacklisted, " << r.row_errors.size()
      << " bad rows\n";
  for (const auto& e : r.row_errors) log << "  line " << e.line << ": " << e.message << '\n';
}

}  // namespace

GroundTruthSeries sim_truth_series(const SimWorld& world, const County& county) {
  std::set<Tick> ticks;
  const Tick duration = world.scenario().duration_ticks;
  for (Tick t = 0; t < duration; t += kTruthCadence) ticks.insert(t);
  ticks.insert(duration - 1);
  for (const auto& inj : world.scenario().injections) {
    if (inj.county != county) continue;
    ticks.insert(inj.start_tick);
    if (inj.end_tick < duration) ticks.insert(inj.end_tick);
  }
  GroundTruthSeries s;
  s.county = county;
  s.source = TruthSource::Sim;
  for (Tick t : ticks) s.samples.push_back({t, world.power_fraction_out(county, t)});
  return s;
}

IntervalsByCounty power_detections(const std::vector<OutageEvent>& events, Tick horizon) {
  IntervalsByCounty out;
  for (const auto& ev : events) {
    if (ev.cls == Classification::Power) out[ev.county].push_back(to_interval(ev, horizon));
  }
  return out;
}

WatchlistReport load_watchlist(const RunConfig& cfg, const Scenario* scenario) {
  Blacklist bl;
  if (cfg.blacklist_reserved) bl.merge(Blacklist::reserved());
  if (!cfg.blacklist_path.empty()) bl.merge(read_blacklist_file(cfg.blacklist_path));

  std::vector<WatchlistRow> rows;
  if (!cfg.watchlist_path.empty()) {
    rows = read_watchlist_csv(cfg.watchlist_path);
  } else if (scenario != nullptr) {
    std::size_t line = 1;
    for (const auto& h : scenario->hosts) {
      rows.push_back(WatchlistRow{++line, h.address.to_string(), h.county, h.isp, std::nullopt});
    }
  }
  return validate_watchlist(rows, cfg.initial_score,
                            [&bl](Ipv4Address a) { return bl.contains(a); });
}

EvaluationSummary run_simulate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const Scenario scenario = read_scenario(cfg.scenario_path);
  const SimWorld world(scenario);
  const auto wl = load_watchlist(cfg, &scenario);
  log_watchlist(log, wl);

  ScoreStore store = initial_store(cfg);
  seed_scores(store, wl.entries);

  fs::create_directories(cfg.output_dir);
  SimulatedBackend backend(world);
  Engine engine(engine_options(cfg), wl.entries, std::move(store), backend);
  EventLogWriter events(cfg.output_dir / "events.jsonl", false);
  AssessmentWriter assessments(cfg.output_dir / "assessments.csv", false);
  engine.add_observer(&events);
  engine.add_observer(&assessments);

  const Tick duration = scenario.duration_ticks;
  for (Tick t = 0; t < duration; ++t) {
    engine.step(t);
    if (cfg.snapshot_every > 0 && t > 0 && t % cfg.snapshot_every == 0) {
      snapshot_scores(engine.scores(), cfg.output_dir / ("scores_" + std::to_string(t) + ".csv"));
    }
  }
  events.flush();
  assessments.flush();
  snapshot_scores(engine.scores(), cfg.output_dir / "scores_final.csv");

  std::map<County, GroundTruthSeries> truth_series;
  for (const auto& county : world.counties()) truth_series.emplace(county, sim_truth_series(world, county));
  write_utility_csv(cfg.output_dir / "truth.csv", truth_series);

  const auto& universe = engine.tracked_ever();
  write_county_list(cfg.output_dir / "counties.txt", universe);

  const double tau = cfg.effective_eval_tau();
  const auto detections = power_detections(engine.events(tau), duration);
  IntervalsByCounty truths;
  for (const auto& county : universe) {
    auto it = truth_series.find(county);
    if (it == truth_series.end()) continue;
    auto ivs = truth_outage_intervals(it->second, cfg.truth_threshold);
    if (!ivs.empty()) truths.emplace(county, std::move(ivs));
  }

  EvaluationSummary summary;
  summary.tau = tau;
  summary.counts = confusion(detections, truths, universe, cfg.buffer_minutes, EvalWindow{0, duration});
  summary.metrics = metrics(summary.counts);
  {
    std::ofstream out(cfg.output_dir / "report.txt");
    write_metrics_text(out, summary.counts, summary.metrics, cfg.buffer_minutes, cfg.truth_threshold, tau);
  }
  {
    std::ofstream out(cfg.output_dir / "report.csv");
    write_metrics_csv(out, windowed_confusion(detections, truths, universe, cfg.buffer_minutes, 0,
                                              duration, cfg.eval_stride_minutes));
  }
  {
    std::ofstream out(cfg.output_dir / "timeseries.csv");
    write_detection_timeseries(out, detections, truths, universe, 0, duration, kTruthCadence);
  }
  write_metrics_text(log, summary.counts, summary.metrics, cfg.buffer_minutes, cfg.truth_threshold, tau);
  return summary;
}

std::set<County> read_county_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open county list " + path.string());
  std::set<County> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (!t.empty() && t.front() != '#') out.emplace(t);
  }
  return out;
}

EvaluationSummary run_evaluate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  auto events = read_event_log(cfg.events_path);
  std::size_t skipped = 0;
  std::size_t gaps = 0;
  const auto series = read_utility_csv(cfg.utility_csv_path, &skipped, &gaps);
  if (skipped > 0) log << "warning: skipped " << skipped << " utility rows with no tracked customers\n";
  if (gaps > 0) log << "warning: " << gaps << " utility sample gaps exceed 10 minutes\n";

  double tau = 0.0;
  if (cfg.eval_tau) {
    tau = *cfg.eval_tau;
  } else if (!events.empty()) {
    tau = std::min_element(events.begin(), events.end(), [](const auto& a, const auto& b) {
            return a.tau < b.tau;
          })->tau;
  }
  std::erase_if(events, [tau](const OutageEvent& e) { return e.tau != tau; });

  std::set<County> universe;
  if (!cfg.universe_path.empty()) {
    universe = read_county_list(cfg.universe_path);
  } else {
    for (const auto& [county, _] : series) universe.insert(county);
  }

  Tick horizon = 0;
  for (const auto& [county, s] : series) {
    if (!s.samples.empty()) horizon = std::max(horizon, s.samples.back().tick + 1);
  }
  for (const auto& e : events) horizon = std::max(horizon, e.end_tick.value_or(e.start_tick) + 1);

  const auto detections = power_detections(events, horizon);
  IntervalsByCounty truths;
  for (const auto& county : universe) {
    auto it = series.find(county);
    if (it == series.end()) continue;
    auto ivs = truth_outage_intervals(it->second, cfg.truth_threshold);
    if (!ivs.empty()) truths.emplace(county, std::move(ivs));
  }

  EvaluationSummary summary;
  summary.tau = tau;
  summary.counts = confusion(detections, truths, universe, cfg.buffer_minutes);
  summary.metrics = metrics(summary.counts);
  write_metrics_text(log, summary.counts, summary.metrics, cfg.buffer_minutes, cfg.truth_threshold, tau);
  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    std::ofstream txt(cfg.output_dir / "report.txt");
    write_metrics_text(txt, summary.counts, summary.metrics, cfg.buffer_minutes, cfg.truth_threshold, tau);
    std::ofstream csv(cfg.output_dir / "report.csv");
    write_metrics_csv(csv, windowed_confusion(detections, truths, universe, cfg.buffer_minutes, 0,
                                              horizon, cfg.eval_stride_minutes));
  }
  return summary;
}

void run_live(const RunConfig& cfg, std::ostream& log, const std::atomic<bool>* stop) {
  using clock = std::chrono::system_clock;
  cfg.validate();
  fs::create_directories(cfg.output_dir);

  const auto wl = load_watchlist(cfg, nullptr);
  log_watchlist(log, wl);
  const auto latest = cfg.output_dir / "scores_latest.csv";
  ScoreStore store = initial_store(cfg, latest);
  seed_scores(store, wl.entries);

  // Persisted epoch: tick 0 of this deployment, in milliseconds since 1970.
  const auto epoch_file = cfg.output_dir / "epoch";
  std::int64_t epoch_ms = 0;
  if (fs::exists(epoch_file)) {
    std::ifstream in(epoch_file);
    std::string s;
    std::getline(in, s);
    auto v = text::parse_int<std::int64_t>(s);
    if (!v) throw ConfigError("corrupt epoch file " + epoch_file.string());
    epoch_ms = *v;
  } else {
    epoch_ms = std::chrono::duration_cast<std::chrono::milliseconds>(clock::now().time_since_epoch())
                   .count();
    std::ofstream(epoch_file) << epoch_ms << '\n';
  }
  const double tick_ms = cfg.live_tick_seconds * 1000.0;
  auto now_ms = [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(clock::now().time_since_epoch())
        .count();
  };
  const Tick start = static_cast<Tick>(std::floor(static_cast<double>(now_ms() - epoch_ms) / tick_ms));
  log << "live: epoch " << epoch_ms << " ms, resuming at tick " << start << '\n';

  ExternalScannerBackend backend(ExternalScannerConfig{cfg.scanner_command, cfg.live_tick_seconds,
                                                       cfg.rate_cap, cfg.output_dir});
  Engine engine(engine_options(cfg), wl.entries, std::move(store), backend);
  EventLogWriter events(cfg.output_dir / "events.jsonl", true);
  AssessmentWriter assessments(cfg.output_dir / "assessments.csv", true);
  engine.add_observer(&events);
  engine.add_observer(&assessments);

  auto flush_state = [&] {
    events.flush();
    assessments.flush();
    snapshot_scores(engine.scores(), latest);
  };

  try {
    for (Tick t = start; cfg.max_ticks == 0 || t < start + cfg.max_ticks; ++t) {
      if (stop != nullptr && stop->load()) break;
      const auto due = epoch_ms + static_cast<std::int64_t>(static_cast<double>(t) * tick_ms);
      while (now_ms() < due) {
        if (stop != nullptr && stop->load()) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(
            std::clamp<std::int64_t>(due - now_ms(), 1, 200)));
      }
      if (stop != nullptr && stop->load()) break;
      engine.step(t);
      if (cfg.snapshot_every > 0 && t % cfg.snapshot_every == 0) flush_state();
    }
  } catch (const BackendError&) {
    flush_state();
    throw;
  }
  flush_state();
}

int run(const RunConfig& cfg, std::ostream& log, std::ostream& err, const std::atomic<bool>* stop) {
  try {
    switch (cfg.mode) {
      case RunMode::Simulate: run_simulate(cfg, log); break;
      case RunMode::Live: run_live(cfg, log, stop); break;
      case RunMode::Evaluate: run_evaluate(cfg, log); break;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const RestoreError& e) {
    err << "snapshot error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const EmptyWatchlist& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BackendError& e) {
    err << "backend failure: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace powerwatch
