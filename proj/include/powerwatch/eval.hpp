#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "powerwatch/model.hpp"

namespace powerwatch {

enum class TruthSource { Sim, UtilityCsv };

struct TruthSample {
  Tick tick = 0;
  double fraction_out = 0.0;  // share of customers without power
};

// A county's outage series. Each sample holds until the next one; the last
// sample holds for a single tick.
struct GroundTruthSeries {
  County county;
  std::vector<TruthSample> samples;  // sorted by tick
  TruthSource source = TruthSource::Sim;
};

// Half-open [start, end).
struct TimeInterval {
  Tick start = 0;
  Tick end = 0;

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

using IntervalsByCounty = std::map<County, std::vector<TimeInterval>>;

// Maximal intervals where fraction_out >= threshold. threshold in (0,1),
// otherwise std::domain_error.
std::vector<TimeInterval> truth_outage_intervals(const GroundTruthSeries& series, double threshold);

// Zero when the intervals overlap or touch, else the gap between the nearest
// boundaries.
Tick interval_distance(const TimeInterval& a, const TimeInterval& b);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

enum class CountyLabel { TruePositive, FalsePositive, FalseNegative, TrueNegative };

struct EvalWindow {
  Tick start = 0;
  Tick end = 0;
};

// One label per county of the universe:
//   TP  some detection and some truth interval are less than `buffer` apart
//       (overlap always counts),
//   FP  otherwise, the county has a detection,
//   FN  otherwise, the county has a truth interval,
//   TN  neither.
// With a window, only intervals intersecting it are considered, clipped to
// it. Throws UnknownRegion for detections in counties outside the universe.
std::map<County, CountyLabel> confusion_labels(const IntervalsByCounty& detections,
                                               const IntervalsByCounty& truths,
                                               const std::set<County>& universe, Tick buffer,
                                               std::optional<EvalWindow> window = std::nullopt);

ConfusionCounts confusion(const IntervalsByCounty& detections, const IntervalsByCounty& truths,
                          const std::set<County>& universe, Tick buffer,
                          std::optional<EvalWindow> window = std::nullopt);

struct Metrics {
  std::optional<double> accuracy;  // (tp+tn)/total
  std::optional<double> fpr;       // fp/(fp+tn)
  std::optional<double> false_omission_rate;  // fn/(fn+tn)
};

// Undefined (nullopt) wherever the denominator is zero.
Metrics metrics(const ConfusionCounts& c);

struct WindowCounts {
  EvalWindow window;
  ConfusionCounts counts;
};

// Counts over consecutive windows [start + k*stride, start + (k+1)*stride).
std::vector<WindowCounts> windowed_confusion(const IntervalsByCounty& detections,
                                             const IntervalsByCounty& truths,
                                             const std::set<County>& universe, Tick buffer,
                                             Tick start, Tick end, Tick stride);

// Closed events become [start, end); open ones run to `horizon`.
TimeInterval to_interval(const OutageEvent& ev, Tick horizon);

// Reads `county,tick,customers_tracked,customers_out`. Rows with zero tracked
// customers are skipped and counted in `skipped`. Throws ParseError on
// malformed rows.
std::map<County, GroundTruthSeries> read_utility_csv(const std::filesystem::path& path,
                                                     std::size_t* skipped = nullptr,
                                                     std::size_t* spacing_warnings = nullptr);

void write_utility_csv(const std::filesystem::path& path,
                       const std::map<County, GroundTruthSeries>& series,
                       std::uint64_t customers_tracked = 1000);

void write_metrics_text(std::ostream& out, const ConfusionCounts& c, const Metrics& m,
                        Tick buffer, double threshold, double tau);
void write_metrics_csv(std::ostream& out, const std::vector<WindowCounts>& windows);

// Per-tick share of universe counties with an open detection and with a
// truth outage, sampled every `stride` ticks.
void write_detection_timeseries(std::ostream& out, const IntervalsByCounty& detections,
                                const IntervalsByCounty& truths, const std::set<County>& universe,
                                Tick start, Tick end, Tick stride);

std::string_view to_string(CountyLabel l);

}  // namespace powerwatch
