#pragma once

// Run orchestration behind the command line: simulate, live and evaluate.

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <vector>

#include "powerwatch/config.hpp"
#include "powerwatch/eval.hpp"
#include "powerwatch/prober.hpp"

namespace powerwatch {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct EvaluationSummary {
  ConfusionCounts counts;
  Metrics metrics;
  double tau = 0.0;
};

// Truth series sampled every 10 ticks plus every injection boundary.
GroundTruthSeries sim_truth_series(const SimWorld& world, const County& county);

// Power-classified events become detection intervals; open events run to
// `horizon`.
IntervalsByCounty power_detections(const std::vector<OutageEvent>& events, Tick horizon);

// Loads, validates and blacklists the watchlist named by the config, falling
// back to the scenario's hosts when no watchlist file is configured.
WatchlistReport load_watchlist(const RunConfig& cfg, const Scenario* scenario);

// Runs a scenario end to end and writes into cfg.output_dir:
//   events.jsonl      event log
//   assessments.csv   one row per fast scan
//   scores_final.csv  score snapshot (plus scores_<tick>.csv every snapshot_every ticks)
//   truth.csv         simulator ground truth in utility-report form
//   counties.txt      tracked county universe
//   report.txt        confusion counts and metrics for the whole run
//   report.csv        the same per eval.stride_minutes window
//   timeseries.csv    detected vs. true outage share over time
EvaluationSummary run_simulate(const RunConfig& cfg, std::ostream& log);

// Joins an event log with a utility report. The county universe is the
// configured county list, or every county in the utility report.
EvaluationSummary run_evaluate(const RunConfig& cfg, std::ostream& log);

// Probes through the external scanner until `stop` is set or max_ticks pass.
// Wall-clock time maps to ticks from an epoch persisted in the output
// directory, so a restart resumes numbering. Throws BackendError after
// flushing state when the scanner fails.
void run_live(const RunConfig& cfg, std::ostream& log, const std::atomic<bool>* stop = nullptr);

// Dispatches on cfg.mode and maps errors to exit codes.
int run(const RunConfig& cfg, std::ostream& log, std::ostream& err,
        const std::atomic<bool>* stop = nullptr);

std::set<County> read_county_list(const std::filesystem::path& path);

}  // namespace powerwatch
