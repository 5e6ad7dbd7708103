#include "powerwatch/model.hpp"

#include <unordered_set>

#include "powerwatch/errors.hpp"

namespace powerwatch {

void Scenario::validate() const {
  if (duration_ticks <= 0) throw ParseError("scenario duration_ticks must be positive");
  for (const auto& h : hosts) {
    if (h.county.empty() || h.isp.empty()) {
      throw ParseError("scenario host " + h.address.to_string() + " lacks county or isp");
    }
    if (!(h.base_response_prob >= 0.0 && h.base_response_prob <= 1.0)) {
      throw ParseError("scenario host " + h.address.to_string() +
                       " base_response_prob outside [0,1]");
    }
  }
  for (const auto& inj : injections) {
    if (inj.start_tick < 0 || inj.end_tick > duration_ticks || inj.start_tick >= inj.end_tick) {
      throw ParseError("injection in " + inj.county + " lies outside [0, duration_ticks]");
    }
    if (inj.kind == InjectionKind::Power && inj.isp) {
      throw ParseError("power injection in " + inj.county + " must cover all ISPs");
    }
    if (inj.kind == InjectionKind::Internet && !inj.isp) {
      throw ParseError("internet injection in " + inj.county + " must name one ISP");
    }
    if (!(inj.fraction > 0.0 && inj.fraction <= 1.0)) {
      throw ParseError("injection fraction in " + inj.county + " outside (0,1]");
    }
  }
}

WatchlistReport validate_watchlist(const std::vector<WatchlistRow>& rows, double default_score,
                                   const std::function<bool(Ipv4Address)>& is_blacklisted) {
  if (rows.empty()) throw EmptyWatchlist();

  WatchlistReport report;
  std::unordered_set<Ipv4Address> seen;
  for (const auto& row : rows) {
    auto addr = Ipv4Address::parse(row.address);
    if (!addr) {
      report.row_errors.push_back({row.line, "malformed address '" + row.address + "'"});
      continue;
    }
    if (row.county.empty()) {
      report.row_errors.push_back({row.line, "empty county"});
      continue;
    }
    if (row.isp.empty()) {
      report.row_errors.push_back({row.line, "empty isp"});
      continue;
    }
    const double score = row.initial_score.value_or(default_score);
    if (!(score >= 0.0 && score <= 1.0)) {
      report.row_errors.push_back({row.line, "initial_score outside [0,1]"});
      continue;
    }
    if (!seen.insert(*addr).second) {
      ++report.duplicates_removed;
      continue;
    }
    IpEntry entry{*addr, row.county, row.isp, score, 0, false};
    if (is_blacklisted && is_blacklisted(*addr)) {
      entry.blacklisted = true;
      ++report.blacklisted;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

std::string_view to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::Normal: return "normal";
    case Hypothesis::Failure: return "failure";
    case Hypothesis::PowerOutage: return "power_outage";
  }
  return "unknown";
}

std::string_view to_string(ScanKind k) {
  return k == ScanKind::SlowFull ? "slow_full" : "fast_reliable";
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::None: return "none";
    case Classification::Power: return "power";
    case Classification::Internet: return "internet";
    case Classification::Unclassified: return "unclassified";
  }
  return "unknown";
}

std::string_view to_string(InjectionKind k) {
  return k == InjectionKind::Power ? "POWER" : "INTERNET";
}

std::optional<Classification> classification_from_string(std::string_view s) {
  if (s == "none") return Classification::None;
  if (s == "power") return Classification::Power;
  if (s == "internet") return Classification::Internet;
  if (s == "unclassified") return Classification::Unclassified;
  return std::nullopt;
}

}  // namespace powerwatch
