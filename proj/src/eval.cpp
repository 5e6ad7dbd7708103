#include "powerwatch/eval.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "powerwatch/errors.hpp"
#include "powerwatch/text.hpp"

namespace powerwatch {

std::vector<TimeInterval> truth_outage_intervals(const GroundTruthSeries& series, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::domain_error("truth threshold must lie in (0,1)");
  }
  std::vector<TimeInterval> out;
  std::optional<Tick> open;
  for (const auto& s : series.samples) {
    const bool out_now = s.fraction_out >= threshold;
    if (out_now && !open) open = s.tick;
    if (!out_now && open) {
      out.push_back({*open, s.tick});
      open.reset();
    }
  }
  if (open) out.push_back({*open, series.samples.back().tick + 1});
  return out;
}

Tick interval_distance(const TimeInterval& a, const TimeInterval& b) {
  if (a.end <= b.start) return b.start - a.end;
  if (b.end <= a.start) return a.start - b.end;
  return 0;
}

namespace {

std::vector<TimeInterval> clip(const std::vector<TimeInterval>& in,
                               const std::optional<EvalWindow>& window) {
  if (!window) return in;
  std::vector<TimeInterval> out;
  for (const auto& iv : in) {
    const Tick s = std::max(iv.start, window->start);
    const Tick e = std::min(iv.end, window->end);
    if (s < e) out.push_back({s, e});
  }
  return out;
}

bool matched(const std::vector<TimeInterval>& dets, const std::vector<TimeInterval>& truths,
             Tick buffer) {
  for (const auto& d : dets) {
    for (const auto& t : truths) {
      const Tick dist = interval_distance(d, t);
      if (dist == 0 || dist < buffer) return true;
    }
  }
  return false;
}

const std::vector<TimeInterval>& lookup(const IntervalsByCounty& m, const County& c) {
  static const std::vector<TimeInterval> kEmpty;
  auto it = m.find(c);
  return it == m.end() ? kEmpty : it->second;
}

}  // namespace

std::map<County, CountyLabel> confusion_labels(const IntervalsByCounty& detections,
                                               const IntervalsByCounty& truths,
                                               const std::set<County>& universe, Tick buffer,
                                               std::optional<EvalWindow> window) {
  for (const auto& [county, _] : detections) {
    if (!universe.contains(county)) throw UnknownRegion(county);
  }
  std::map<County, CountyLabel> labels;
  for (const auto& county : universe) {
    const auto dets = clip(lookup(detections, county), window);
    const auto tru = clip(lookup(truths, county), window);
    CountyLabel label = CountyLabel::TrueNegative;
    if (!dets.empty() && !tru.empty() && matched(dets, tru, buffer)) {
      label = CountyLabel::TruePositive;
    } else if (!dets.empty()) {
      label = CountyLabel::FalsePositive;
    } else if (!tru.empty()) {
      label = CountyLabel::FalseNegative;
    }
    labels.emplace(county, label);
  }
  return labels;
}

ConfusionCounts confusion(const IntervalsByCounty& detections, const IntervalsByCounty& truths,
                          const std::set<County>& universe, Tick buffer,
                          std::optional<EvalWindow> window) {
  ConfusionCounts c;
  for (const auto& [county, label] : confusion_labels(detections, truths, universe, buffer, window)) {
    switch (label) {
      case CountyLabel::TruePositive: ++c.tp; break;
      case CountyLabel::FalsePositive: ++c.fp; break;
      case CountyLabel::FalseNegative: ++c.fn; break;
      case CountyLabel::TrueNegative: ++c.tn; break;
    }
  }
  return c;
}

Metrics metrics(const ConfusionCounts& c) {
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return Metrics{ratio(c.tp + c.tn, c.total()), ratio(c.fp, c.fp + c.tn), ratio(c.fn, c.fn + c.tn)};
}

std::vector<WindowCounts> windowed_confusion(const IntervalsByCounty& detections,
                                             const IntervalsByCounty& truths,
                                             const std::set<County>& universe, Tick buffer,
                                             Tick start, Tick end, Tick stride) {
  if (stride <= 0) throw std::invalid_argument("stride must be positive");
  std::vector<WindowCounts> out;
  for (Tick w = start; w < end; w += stride) {
    EvalWindow win{w, std::min(w + stride, end)};
    out.push_back({win, confusion(detections, truths, universe, buffer, win)});
  }
  return out;
}

TimeInterval to_interval(const OutageEvent& ev, Tick horizon) {
  return {ev.start_tick, ev.end_tick.value_or(std::max(horizon, ev.start_tick + 1))};
}

std::map<County, GroundTruthSeries> read_utility_csv(const std::filesystem::path& path,
                                                     std::size_t* skipped,
                                                     std::size_t* spacing_warnings) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open utility report " + path.string());
  std::map<County, GroundTruthSeries> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::size_t skip_count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto f = text::split(t, ',');
    if (!header) {
      if (f.size() != 4 || f[0] != "county" || f[1] != "tick" || f[2] != "customers_tracked" ||
          f[3] != "customers_out") {
        throw ParseError(path.string() + ": expected header county,tick,customers_tracked,customers_out");
      }
      header = true;
      continue;
    }
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (f.size() != 4) throw ParseError(where + ": expected 4 fields");
    auto tick = text::parse_int<Tick>(f[1]);
    auto tracked = text::parse_double(f[2]);
    auto lost = text::parse_double(f[3]);
    if (f[0].empty() || !tick || !tracked || !lost || *tracked < 0 || *lost < 0) {
      throw ParseError(where + ": malformed row");
    }
    if (*tracked == 0.0) {
      ++skip_count;
      continue;
    }
    auto& series = out[f[0]];
    series.county = f[0];
    series.source = TruthSource::UtilityCsv;
    series.samples.push_back({*tick, std::clamp(*lost / *tracked, 0.0, 1.0)});
  }
  if (!header) throw ParseError(path.string() + ": missing header");

  std::size_t gaps = 0;
  for (auto& [county, series] : out) {
    std::stable_sort(series.samples.begin(), series.samples.end(),
                     [](const TruthSample& a, const TruthSample& b) { return a.tick < b.tick; });
    for (std::size_t i = 1; i < series.samples.size(); ++i) {
      if (series.samples[i].tick - series.samples[i - 1].tick > 10) ++gaps;
    }
  }
  if (skipped) *skipped = skip_count;
  if (spacing_warnings) *spacing_warnings = gaps;
  return out;
}

void write_utility_csv(const std::filesystem::path& path,
                       const std::map<County, GroundTruthSeries>& series,
                       std::uint64_t customers_tracked) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "county,tick,customers_tracked,customers_out\n";
  for (const auto& [county, s] : series) {
    for (const auto& sample : s.samples) {
      const auto lost = static_cast<std::uint64_t>(
          sample.fraction_out * static_cast<double>(customers_tracked) + 0.5);
      out << county << ',' << sample.tick << ',' << customers_tracked << ',' << lost << '\n';
    }
  }
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? text::fixed(*v, 6) : "undefined"; }

}  // namespace

void write_metrics_text(std::ostream& out, const ConfusionCounts& c, const Metrics& m, Tick buffer,
                        double threshold, double tau) {
  out << "counties      " << c.total() << '\n'
      << "buffer_min    " << buffer << '\n'
      << "truth_thresh  " << text::exact(threshold) << '\n'
      << "report_tau    " << text::exact(tau) << '\n'
      << "tp            " << c.tp << '\n'
      << "fp            " << c.fp << '\n'
      << "fn            " << c.fn << '\n'
      << "tn            " << c.tn << '\n'
      << "accuracy      " << opt(m.accuracy) << '\n'
      << "fpr           " << opt(m.fpr) << '\n'
      << "for           " << opt(m.false_omission_rate) << '\n';
}

void write_metrics_csv(std::ostream& out, const std::vector<WindowCounts>& windows) {
  out << "window_start,window_end,tp,fp,fn,tn,accuracy,fpr,for\n";
  for (const auto& w : windows) {
    const auto m = metrics(w.counts);
    out << w.window.start << ',' << w.window.end << ',' << w.counts.tp << ',' << w.counts.fp << ','
        << w.counts.fn << ',' << w.counts.tn << ',' << (m.accuracy ? text::fixed(*m.accuracy, 6) : "")
        << ',' << (m.fpr ? text::fixed(*m.fpr, 6) : "") << ','
        << (m.false_omission_rate ? text::fixed(*m.false_omission_rate, 6) : "") << '\n';
  }
}

void write_detection_timeseries(std::ostream& out, const IntervalsByCounty& detections,
                                const IntervalsByCounty& truths, const std::set<County>& universe,
                                Tick start, Tick end, Tick stride) {
  if (stride <= 0) throw std::invalid_argument("stride must be positive");
  auto active = [](const std::vector<TimeInterval>& ivs, Tick t) {
    return std::any_of(ivs.begin(), ivs.end(),
                       [t](const TimeInterval& iv) { return t >= iv.start && t < iv.end; });
  };
  const double n = universe.empty() ? 1.0 : static_cast<double>(universe.size());
  out << "tick,detected_fraction,truth_fraction\n";
  for (Tick t = start; t < end; t += stride) {
    std::size_t det = 0;
    std::size_t tru = 0;
    for (const auto& c : universe) {
      if (active(lookup(detections, c), t)) ++det;
      if (active(lookup(truths, c), t)) ++tru;
    }
    out << t << ',' << text::fixed(static_cast<double>(det) / n, 6) << ','
        << text::fixed(static_cast<double>(tru) / n, 6) << '\n';
  }
}

std::string_view to_string(CountyLabel l) {
  switch (l) {
    case CountyLabel::TruePositive: return "TP";
    case CountyLabel::FalsePositive: return "FP";
    case CountyLabel::FalseNegative: return "FN";
    case CountyLabel::TrueNegative: return "TN";
  }
  return "?";
}

}  // namespace powerwatch
