#include "powerwatch/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace powerwatch {

ScoreStore::ScoreStore(double alpha, double initial_score)
    : alpha_(alpha), initial_score_(initial_score) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
  if (!(initial_score >= 0.0 && initial_score <= 1.0)) {
    throw std::domain_error("initial score must lie in [0,1]");
  }
}

void ScoreStore::set(Ipv4Address address, ScoreRecord record) {
  record.score = std::clamp(record.score, 0.0, 1.0);
  records_[address] = record;
}

ScoreRecord ScoreStore::record(Ipv4Address address) const {
  auto it = records_.find(address);
  if (it == records_.end()) return ScoreRecord{initial_score_, 0};
  return it->second;
}

double ScoreStore::update(const ProbeOutcome& outcome) {
  auto [it, inserted] = records_.try_emplace(outcome.address, ScoreRecord{initial_score_, 0});
  auto& rec = it->second;
  const double sigma = outcome.responded ? 1.0 : 0.0;
  // A convex combination of two values in [0,1]; the clamp only absorbs
  // rounding at the endpoints.
  rec.score = std::clamp(rec.score * (1.0 - alpha_) + alpha_ * sigma, 0.0, 1.0);
  ++rec.probe_count;
  return rec.score;
}

double region_expected_rate(const ScoreStore& store, std::span<const Ipv4Address> members) {
  double sum = 0.0;
  for (auto a : members) sum += store.score(a);
  return sum;
}

std::size_t reliable_watch_size(double expected_rate) {
  if (std::isnan(expected_rate) || expected_rate < 0.0) {
    throw std::domain_error("expected rate must be non-negative");
  }
  if (expected_rate < kTrackingCutoff) return 0;
  const double linear = std::floor(expected_rate);
  const double logarithmic = std::floor(100.0 * std::log10(expected_rate));
  return static_cast<std::size_t>(std::min(linear, logarithmic));
}

}  // namespace powerwatch
