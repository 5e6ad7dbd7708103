#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "powerwatch/model.hpp"

namespace powerwatch {

struct DetectorConfig {
  // Failure threshold on (expected - bias) - actual. Drives score gating and
  // scan frequency.
  double tau_gate = 0.07;
  // Thresholds at which outage events are reported, each tracked separately.
  std::vector<double> tau_report = {0.15, 0.3};
  // Offset between live response rates and EWMA scores, subtracted from the
  // expected rate before comparing. 0 for stationary simulated worlds.
  double ewma_bias = 0.07;
  // ISPs with fewer sampled members do not take part in classification.
  std::size_t min_isp_samples = 5;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

struct IspAssessment {
  double actual = 0.0;
  double expected = 0.0;
  double gap = 0.0;
  std::size_t n_samples = 0;
};

struct ScanAssessment {
  County county;
  Tick tick = 0;
  double actual_up = 0.0;    // fraction of the reliable watchlist responding
  double expected_up = 0.0;  // mean score of the same members before the scan
  double gap = 0.0;          // (expected - bias) - actual
  bool failure = false;      // gap > tau_gate
  std::map<std::string, IspAssessment> per_isp;
  Classification classification = Classification::None;
  std::size_t watch_size = 0;
};

// Pure. Throws EmptyScan for a scan without outcomes.
ScanAssessment assess_scan(const ScanResult& result, const DetectorConfig& cfg);

// Power when every qualifying ISP (n >= min_samples) exceeds tau, Internet
// when qualifying ISPs disagree, Unclassified with fewer than two qualifying
// ISPs.
Classification classify_failure(const std::map<std::string, IspAssessment>& per_isp, double tau,
                                std::size_t min_samples);

inline Classification classify_failure(const std::map<std::string, IspAssessment>& per_isp,
                                       const DetectorConfig& cfg) {
  return classify_failure(per_isp, cfg.tau_gate, cfg.min_isp_samples);
}

// Scores are frozen whenever the region is in a failure hypothesis.
inline bool gate_score_updates(const ScanAssessment& a) { return !a.failure; }

struct EventTransition {
  enum class Kind { None, Open, Sustain, Close };
  Kind kind = Kind::None;
  bool reclassified = false;  // class of the open event changed on this step
  std::optional<OutageEvent> event;  // state after the step (closed event on Close)
};

// Advances one event track. `previous` is the currently open event, if any.
// The track fails when the assessment's gap exceeds tau; its class is
// upgraded towards Power as constituent assessments classify.
EventTransition track_events(const std::optional<OutageEvent>& previous,
                             const ScanAssessment& assessment, double tau,
                             std::size_t min_isp_samples);

// Stateful wrapper around track_events for one (region, tau) pair that also
// enforces tick ordering.
class EventTrack {
 public:
  EventTrack(double tau, std::size_t min_isp_samples) : tau_(tau), min_isp_samples_(min_isp_samples) {}

  // Throws OrderingError if the assessment is older than the previous one.
  EventTransition step(const ScanAssessment& assessment);

  double tau() const { return tau_; }
  const std::optional<OutageEvent>& open_event() const { return open_; }

 private:
  double tau_;
  std::size_t min_isp_samples_;
  std::optional<OutageEvent> open_;
  std::optional<Tick> last_tick_;
};

// Strength order used when upgrading an open event's class.
int class_rank(Classification c);

}  // namespace powerwatch
