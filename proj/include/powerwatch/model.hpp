#pragma once

// Shared domain types. Everything here is a plain value type; mutation of
// live state happens inside ScoreStore, Scheduler and the Engine.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "powerwatch/ipv4.hpp"

namespace powerwatch {

// Discrete time in minutes since the start of a run.
using Tick = std::int64_t;

// Opaque region identifier (a FIPS code for real data, any label otherwise).
using County = std::string;

struct IpEntry {
  Ipv4Address address;
  County county;
  std::string isp;
  double score = 0.5;
  std::uint64_t probe_count = 0;
  bool blacklisted = false;
};

struct ProbeOutcome {
  Ipv4Address address;
  Tick tick = 0;
  bool responded = false;

  friend bool operator==(const ProbeOutcome&, const ProbeOutcome&) = default;
};

enum class Hypothesis { Normal, Failure, PowerOutage };

struct RegionState {
  County county;
  double expected_rate = 0.0;  // sum of member scores
  std::size_t watch_size = 0;  // reliable watchlist size
  int counter = 0;
  int period_value = 5;  // in 2-minute quanta, 1..5
  Hypothesis hypothesis = Hypothesis::Normal;
  bool tracked = false;
};

enum class ScanKind { SlowFull, FastReliable };

// One scan round. outcomes, sampled_scores and isps are parallel: entry i of
// each describes the same address.
struct ScanResult {
  County county;
  Tick tick = 0;
  ScanKind kind = ScanKind::FastReliable;
  std::vector<ProbeOutcome> outcomes;
  std::vector<double> sampled_scores;  // score at sampling time
  std::vector<std::string> isps;

  bool consistent() const {
    return sampled_scores.size() == outcomes.size() && isps.size() == outcomes.size();
  }
};

// Assessment-level verdict. None means the scan was not a failure.
enum class Classification { None, Power, Internet, Unclassified };

struct OutageEvent {
  County county;
  Classification cls = Classification::Unclassified;
  double tau = 0.0;  // report threshold this event was tracked at
  Tick start_tick = 0;
  std::optional<Tick> end_tick;
  double peak_gap = 0.0;
  std::map<std::string, double> isp_breakdown;

  bool open() const { return !end_tick.has_value(); }
};

enum class InjectionKind { Power, Internet };

struct Injection {
  Tick start_tick = 0;
  Tick end_tick = 0;  // exclusive
  County county;
  InjectionKind kind = InjectionKind::Power;
  std::optional<std::string> isp;  // empty means every ISP
  double fraction = 1.0;           // share of addresses affected (power only)

  bool covers(Tick t) const { return t >= start_tick && t < end_tick; }
};

struct ScenarioHost {
  Ipv4Address address;
  County county;
  std::string isp;
  double base_response_prob = 1.0;
};

struct Scenario {
  std::vector<ScenarioHost> hosts;
  std::vector<Injection> injections;
  std::uint64_t seed = 0;
  Tick duration_ticks = 0;

  // Throws ParseError describing the first violated constraint.
  void validate() const;
};

// One row as read from a watchlist file, before validation.
struct WatchlistRow {
  std::size_t line = 0;
  std::string address;
  County county;
  std::string isp;
  std::optional<double> initial_score;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct WatchlistReport {
  std::vector<IpEntry> entries;
  std::size_t duplicates_removed = 0;
  std::size_t blacklisted = 0;
  std::vector<RowError> row_errors;
};

// Parses and deduplicates rows (first occurrence wins). Bad rows are
// reported and skipped. Entries matching is_blacklisted are kept but flagged.
// Throws EmptyWatchlist when rows is empty.
WatchlistReport validate_watchlist(const std::vector<WatchlistRow>& rows,
                                   double default_score,
                                   const std::function<bool(Ipv4Address)>& is_blacklisted = {});

std::string_view to_string(Hypothesis h);
std::string_view to_string(ScanKind k);
std::string_view to_string(Classification c);
std::string_view to_string(InjectionKind k);
std::optional<Classification> classification_from_string(std::string_view s);

}  // namespace powerwatch
