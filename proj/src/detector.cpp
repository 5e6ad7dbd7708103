#include "powerwatch/detector.hpp"

#include <algorithm>
#include <stdexcept>

#include "powerwatch/errors.hpp"

namespace powerwatch {

void DetectorConfig::validate() const {
  if (!(tau_gate > 0.0 && tau_gate < 1.0)) throw ConfigError("tau_gate must lie in (0,1)");
  for (double t : tau_report) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("every tau_report must lie in (0,1)");
  }
  if (!(ewma_bias >= 0.0)) throw ConfigError("ewma_bias must be non-negative");
}

ScanAssessment assess_scan(const ScanResult& result, const DetectorConfig& cfg) {
  if (result.outcomes.empty()) throw EmptyScan();
  if (!result.consistent()) throw std::invalid_argument("scan result columns differ in length");

  struct Sums {
    double up = 0.0;
    double expected = 0.0;
    std::size_t n = 0;
  };
  Sums total;
  std::map<std::string, Sums> by_isp;
  for (std::size_t i = 0; i < result.outcomes.size(); ++i) {
    const double up = result.outcomes[i].responded ? 1.0 : 0.0;
    const double s = result.sampled_scores[i];
    total.up += up;
    total.expected += s;
    ++total.n;
    auto& b = by_isp[result.isps[i]];
    b.up += up;
    b.expected += s;
    ++b.n;
  }

  ScanAssessment a;
  a.county = result.county;
  a.tick = result.tick;
  a.watch_size = result.outcomes.size();
  a.actual_up = total.up / static_cast<double>(total.n);
  a.expected_up = total.expected / static_cast<double>(total.n);
  a.gap = (a.expected_up - cfg.ewma_bias) - a.actual_up;
  a.failure = a.gap > cfg.tau_gate;
  for (const auto& [isp, s] : by_isp) {
    IspAssessment ia;
    ia.n_samples = s.n;
    ia.actual = s.up / static_cast<double>(s.n);
    ia.expected = s.expected / static_cast<double>(s.n);
    ia.gap = (ia.expected - cfg.ewma_bias) - ia.actual;
    a.per_isp.emplace(isp, ia);
  }
  a.classification = a.failure ? classify_failure(a.per_isp, cfg) : Classification::None;
  return a;
}

Classification classify_failure(const std::map<std::string, IspAssessment>& per_isp, double tau,
                                std::size_t min_samples) {
  std::size_t qualifying = 0;
  std::size_t above = 0;
  for (const auto& [isp, ia] : per_isp) {
    if (ia.n_samples < min_samples) continue;
    ++qualifying;
    if (ia.gap > tau) ++above;
  }
  if (qualifying < 2) return Classification::Unclassified;
  if (above == qualifying) return Classification::Power;
  if (above > 0) return Classification::Internet;
  // Region-level drop without any single qualifying ISP crossing tau: the
  // drop is spread too thin to attribute.
  return Classification::Unclassified;
}

int class_rank(Classification c) {
  switch (c) {
    case Classification::None: return 0;
    case Classification::Unclassified: return 1;
    case Classification::Internet: return 2;
    case Classification::Power: return 3;
  }
  return 0;
}

EventTransition track_events(const std::optional<OutageEvent>& previous,
                             const ScanAssessment& assessment, double tau,
                             std::size_t min_isp_samples) {
  EventTransition tr;
  const bool failing = assessment.gap > tau;
  const bool have_open = previous && previous->open();

  auto breakdown = [&] {
    std::map<std::string, double> out;
    for (const auto& [isp, ia] : assessment.per_isp) out.emplace(isp, ia.gap);
    return out;
  };

  if (!have_open) {
    if (!failing) return tr;
    OutageEvent ev;
    ev.county = assessment.county;
    ev.tau = tau;
    ev.start_tick = assessment.tick;
    ev.peak_gap = assessment.gap;
    ev.cls = classify_failure(assessment.per_isp, tau, min_isp_samples);
    ev.isp_breakdown = breakdown();
    tr.kind = EventTransition::Kind::Open;
    tr.event = std::move(ev);
    return tr;
  }

  OutageEvent ev = *previous;
  if (!failing) {
    ev.end_tick = assessment.tick;
    tr.kind = EventTransition::Kind::Close;
    tr.event = std::move(ev);
    return tr;
  }

  ev.peak_gap = std::max(ev.peak_gap, assessment.gap);
  const auto cls = classify_failure(assessment.per_isp, tau, min_isp_samples);
  if (class_rank(cls) > class_rank(ev.cls)) {
    ev.cls = cls;
    ev.isp_breakdown = breakdown();
    tr.reclassified = true;
  }
  tr.kind = EventTransition::Kind::Sustain;
  tr.event = std::move(ev);
  return tr;
}

EventTransition EventTrack::step(const ScanAssessment& assessment) {
  if (last_tick_ && assessment.tick < *last_tick_) {
    throw OrderingError("assessment for " + assessment.county + " at tick " +
                        std::to_string(assessment.tick) + " arrived after tick " +
                        std::to_string(*last_tick_));
  }
  last_tick_ = assessment.tick;
  auto tr = track_events(open_, assessment, tau_, min_isp_samples_);
  switch (tr.kind) {
    case EventTransition::Kind::Open:
    case EventTransition::Kind::Sustain: open_ = tr.event; break;
    case EventTransition::Kind::Close: open_.reset(); break;
    case EventTransition::Kind::None: break;
  }
  return tr;
}

}  // namespace powerwatch
