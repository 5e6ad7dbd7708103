#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "powerwatch/model.hpp"

namespace powerwatch {

struct ScoreRecord {
  double score = 0.5;
  std::uint64_t probe_count = 0;

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

// Per-address reliability scores, an exponentially weighted moving average of
// probe responses: S' = S * (1 - alpha) + alpha * responded.
//
// Single writer. Addresses never seen report initial_score with zero probes.
class ScoreStore {
 public:
  static constexpr double kDefaultAlpha = 0.01;
  static constexpr double kDefaultInitialScore = 0.5;

  ScoreStore(double alpha = kDefaultAlpha, double initial_score = kDefaultInitialScore);

  double alpha() const { return alpha_; }
  double initial_score() const { return initial_score_; }

  // Seeds an address with a known score (e.g. from a watchlist file or a
  // restored snapshot). Clamped to [0,1].
  void set(Ipv4Address address, ScoreRecord record);

  ScoreRecord record(Ipv4Address address) const;
  double score(Ipv4Address address) const { return record(address).score; }

  // Applies one probe outcome and returns the new score. Whether an outcome
  // should count at all is decided by the caller.
  double update(const ProbeOutcome& outcome);

  std::size_t size() const { return records_.size(); }
  const std::unordered_map<Ipv4Address, ScoreRecord>& records() const { return records_; }

 private:
  double alpha_;
  double initial_score_;
  std::unordered_map<Ipv4Address, ScoreRecord> records_;
};

inline double update_score(ScoreStore& store, const ProbeOutcome& outcome) {
  return store.update(outcome);
}

// Expected number of responders per scan of a region: the sum of member scores.
double region_expected_rate(const ScoreStore& store, std::span<const Ipv4Address> members);

// Regions with an expected rate under this are not tracked.
inline constexpr double kTrackingCutoff = 10.0;

// Reliable watchlist size for a region: 0 below the tracking cutoff, else
// min(floor(E), floor(100 * log10(E))). Linear up to E = 237, logarithmic
// beyond. Throws std::domain_error for negative or NaN input.
std::size_t reliable_watch_size(double expected_rate);

}  // namespace powerwatch
