#include "powerwatch/watchlist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "powerwatch/errors.hpp"
#include "powerwatch/rng.hpp"
#include "powerwatch/text.hpp"

namespace powerwatch {

Blacklist Blacklist::reserved() {
  static constexpr const char* kReserved[] = {
      "0.0.0.0/8",       "10.0.0.0/8",      "100.64.0.0/10",  "127.0.0.0/8",
      "169.254.0.0/16",  "172.16.0.0/12",   "192.0.0.0/24",   "192.0.2.0/24",
      "192.88.99.0/24",  "192.168.0.0/16",  "198.18.0.0/15",  "198.51.100.0/24",
      "203.0.113.0/24",  "224.0.0.0/4",     "240.0.0.0/4",
  };
  Blacklist bl;
  for (const char* text : kReserved) bl.add(*CidrBlock::parse(text), BlacklistSource::Reserved);
  return bl;
}

void Blacklist::add(CidrBlock block, BlacklistSource source) {
  if (block.prefix == 32) hosts_.insert(block.base);
  entries_.push_back({block, source});
}

void Blacklist::merge(const Blacklist& other) {
  for (const auto& e : other.entries_) add(e.block, e.source);
}

bool Blacklist::contains(Ipv4Address address) const {
  if (hosts_.contains(address)) return true;
  return std::any_of(entries_.begin(), entries_.end(), [&](const BlacklistEntry& e) {
    return e.block.prefix != 32 && e.block.contains(address);
  });
}

std::map<County, RegionRoster> build_rosters(const std::vector<IpEntry>& entries) {
  std::map<County, RegionRoster> rosters;
  for (const auto& e : entries) {
    if (e.blacklisted) continue;
    auto& r = rosters[e.county];
    r.county = e.county;
    r.members.push_back(e.address);
    r.by_isp[e.isp].push_back(e.address);
  }
  return rosters;
}

RegionRoster apply_blacklist(const RegionRoster& roster, const Blacklist& blacklist) {
  if (blacklist.empty()) return roster;
  RegionRoster out;
  out.county = roster.county;
  std::unordered_set<Ipv4Address> dropped;
  for (auto a : roster.members) {
    if (blacklist.contains(a)) {
      dropped.insert(a);
    } else {
      out.members.push_back(a);
    }
  }
  for (const auto& [isp, addrs] : roster.by_isp) {
    std::vector<Ipv4Address> kept;
    for (auto a : addrs) {
      if (!dropped.contains(a)) kept.push_back(a);
    }
    if (!kept.empty()) out.by_isp.emplace(isp, std::move(kept));
  }
  return out;
}

std::vector<Ipv4Address> sample_reliable_watchlist(const RegionRoster& roster,
                                                   const ScoreStore& store, std::size_t n,
                                                   std::uint64_t seed) {
  const auto& members = roster.members;
  if (n > members.size()) {
    throw SizingError("cannot draw " + std::to_string(n) + " from region " + roster.county +
                      " with " + std::to_string(members.size()) + " members");
  }
  if (n == 0) return {};

  // Exponential-key form of successive weighted sampling: each member gets
  // key log(u)/w and the n largest keys win, in draw order. Zero-weight
  // members sit in a lower tier keyed by log(u) alone.
  struct Keyed {
    double key;
    int tier;  // 1 = positive score, 0 = zero score
    std::size_t index;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(members.size());
  rng::SplitMix gen(seed);
  for (std::size_t i = 0; i < members.size(); ++i) {
    double u = gen.uniform();
    if (u <= 0.0) u = 0x1.0p-60;
    const double w = store.score(members[i]);
    if (w > 0.0) {
      keyed.push_back({std::log(u) / w, 1, i});
    } else {
      keyed.push_back({std::log(u), 0, i});
    }
  }
  auto better = [](const Keyed& a, const Keyed& b) {
    if (a.tier != b.tier) return a.tier > b.tier;
    if (a.key != b.key) return a.key > b.key;
    return a.index < b.index;
  };
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(n), keyed.end(),
                    better);

  std::vector<Ipv4Address> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(members[keyed[k].index]);
  return out;
}

std::vector<WatchlistRow> read_watchlist_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open watchlist " + path.string());

  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  bool has_score_column = false;
  std::vector<WatchlistRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto fields = text::split(trimmed, ',');
    for (auto& f : fields) f = std::string(text::trim(f));
    if (!have_header) {
      if (fields.size() < 3 || fields[0] != "address" || fields[1] != "county" ||
          fields[2] != "isp" || (fields.size() == 4 && fields[3] != "initial_score") ||
          fields.size() > 4) {
        throw ParseError(path.string() + ": expected header address,county,isp[,initial_score]");
      }
      has_score_column = fields.size() == 4;
      have_header = true;
      continue;
    }
    WatchlistRow row;
    row.line = line_no;
    if (fields.size() < 3 || fields.size() > (has_score_column ? 4u : 3u)) {
      // Keep the row so validation reports it with its line number.
      row.address = fields.empty() ? std::string{} : fields[0];
      row.address += "<bad field count>";
      rows.push_back(std::move(row));
      continue;
    }
    row.address = fields[0];
    row.county = fields[1];
    row.isp = fields[2];
    if (fields.size() == 4 && !fields[3].empty()) {
      auto v = text::parse_double(fields[3]);
      row.initial_score = v ? *v : -1.0;  // rejected by validation
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(path.string() + ": missing header");
  return rows;
}

void write_watchlist_csv(const std::filesystem::path& path, const std::vector<IpEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "address,county,isp\n";
  for (const auto& e : entries) {
    out << e.address.to_string() << ',' << e.county << ',' << e.isp << '\n';
  }
}

Blacklist read_blacklist_file(const std::filesystem::path& path, BlacklistSource source) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open blacklist " + path.string());
  Blacklist bl;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto content = text::trim(std::string_view(line).substr(0, line.find('#')));
    if (content.empty()) continue;
    auto block = CidrBlock::parse(content);
    if (!block) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad address or block '" +
                       std::string(content) + "'");
    }
    bl.add(*block, source);
  }
  return bl;
}

}  // namespace powerwatch
