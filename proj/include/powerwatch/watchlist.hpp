#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "powerwatch/model.hpp"
#include "powerwatch/scoring.hpp"

namespace powerwatch {

enum class BlacklistSource { Reserved, OptOut };

struct BlacklistEntry {
  CidrBlock block;
  BlacklistSource source = BlacklistSource::OptOut;
};

// Addresses and blocks that must never be probed.
class Blacklist {
 public:
  Blacklist() = default;

  // IANA special-purpose IPv4 ranges (private, loopback, multicast, ...).
  static Blacklist reserved();

  void add(CidrBlock block, BlacklistSource source = BlacklistSource::OptOut);
  void merge(const Blacklist& other);

  bool contains(Ipv4Address address) const;
  bool empty() const { return entries_.empty(); }
  const std::vector<BlacklistEntry>& entries() const { return entries_; }

 private:
  std::vector<BlacklistEntry> entries_;
  std::unordered_set<Ipv4Address> hosts_;  // /32 fast path
};

// The residential watchlist of one region, grouped by ISP.
struct RegionRoster {
  County county;
  std::vector<Ipv4Address> members;
  std::map<std::string, std::vector<Ipv4Address>> by_isp;
};

// Groups non-blacklisted entries by county, preserving input order.
std::map<County, RegionRoster> build_rosters(const std::vector<IpEntry>& entries);

RegionRoster apply_blacklist(const RegionRoster& roster, const Blacklist& blacklist);

// Draws n distinct members with probability proportional to score, with the
// same distribution as successive draw-remove-renormalize sampling.
// Zero-score members are only drawn once every positive-score member has
// been taken; they are then drawn uniformly. Deterministic for a fixed seed.
// Throws SizingError if n exceeds the roster size.
std::vector<Ipv4Address> sample_reliable_watchlist(const RegionRoster& roster,
                                                   const ScoreStore& store, std::size_t n,
                                                   std::uint64_t seed);

// Watchlist CSV: header `address,county,isp[,initial_score]`. Throws
// ParseError on a missing or wrong header; row-level problems surface later
// from validate_watchlist.
std::vector<WatchlistRow> read_watchlist_csv(const std::filesystem::path& path);
void write_watchlist_csv(const std::filesystem::path& path, const std::vector<IpEntry>& entries);

// One address or CIDR block per line; `#` starts a comment.
Blacklist read_blacklist_file(const std::filesystem::path& path,
                              BlacklistSource source = BlacklistSource::OptOut);

}  // namespace powerwatch
