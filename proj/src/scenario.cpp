#include "powerwatch/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "powerwatch/errors.hpp"
#include "powerwatch/rng.hpp"

namespace powerwatch {

using nlohmann::ordered_json;

namespace {

template <typename T>
T required(const ordered_json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

Scenario from_json(const ordered_json& j) {
  if (!j.is_object()) throw ParseError("scenario: top level must be an object");
  const int format = required<int>(j, "format", "scenario");
  if (format != kScenarioFormat) {
    throw ParseError("scenario: unsupported format " + std::to_string(format));
  }
  Scenario s;
  s.seed = required<std::uint64_t>(j, "seed", "scenario");
  s.duration_ticks = required<Tick>(j, "duration_ticks", "scenario");

  const auto ips = j.find("ips");
  if (ips == j.end() || !ips->is_array()) throw ParseError("scenario: 'ips' must be an array");
  for (std::size_t i = 0; i < ips->size(); ++i) {
    const auto& row = (*ips)[i];
    const std::string where = "scenario ips[" + std::to_string(i) + "]";
    ScenarioHost h;
    const auto addr = required<std::string>(row, "address", where);
    auto parsed = Ipv4Address::parse(addr);
    if (!parsed) throw ParseError(where + ": malformed address '" + addr + "'");
    h.address = *parsed;
    h.county = required<std::string>(row, "county", where);
    h.isp = required<std::string>(row, "isp", where);
    h.base_response_prob = required<double>(row, "base_response_prob", where);
    s.hosts.push_back(std::move(h));
  }

  if (auto inj = j.find("injections"); inj != j.end()) {
    if (!inj->is_array()) throw ParseError("scenario: 'injections' must be an array");
    for (std::size_t i = 0; i < inj->size(); ++i) {
      const auto& row = (*inj)[i];
      const std::string where = "scenario injections[" + std::to_string(i) + "]";
      Injection in;
      in.start_tick = required<Tick>(row, "start_tick", where);
      in.end_tick = required<Tick>(row, "end_tick", where);
      in.county = required<std::string>(row, "county", where);
      const auto kind = required<std::string>(row, "kind", where);
      if (kind == "POWER") {
        in.kind = InjectionKind::Power;
      } else if (kind == "INTERNET") {
        in.kind = InjectionKind::Internet;
      } else {
        throw ParseError(where + ": kind must be POWER or INTERNET");
      }
      const auto scope = required<std::string>(row, "scope", where);
      if (scope == "ISP") {
        in.isp = required<std::string>(row, "isp", where);
      } else if (scope != "ALL_ISPS") {
        throw ParseError(where + ": scope must be ALL_ISPS or ISP");
      }
      if (auto f = row.find("fraction"); f != row.end()) in.fraction = f->get<double>();
      s.injections.push_back(std::move(in));
    }
  }
  s.validate();
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  return from_json(j);
}

Scenario read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string dump_scenario(const Scenario& s) {
  ordered_json j;
  j["format"] = kScenarioFormat;
  j["seed"] = s.seed;
  j["duration_ticks"] = s.duration_ticks;
  auto ips = ordered_json::array();
  for (const auto& h : s.hosts) {
    ips.push_back({{"address", h.address.to_string()},
                   {"county", h.county},
                   {"isp", h.isp},
                   {"base_response_prob", h.base_response_prob}});
  }
  j["ips"] = std::move(ips);
  auto injections = ordered_json::array();
  for (const auto& in : s.injections) {
    ordered_json row{{"start_tick", in.start_tick},
                     {"end_tick", in.end_tick},
                     {"county", in.county},
                     {"kind", std::string(to_string(in.kind))},
                     {"scope", in.isp ? "ISP" : "ALL_ISPS"}};
    if (in.isp) row["isp"] = *in.isp;
    row["fraction"] = in.fraction;
    injections.push_back(std::move(row));
  }
  j["injections"] = std::move(injections);
  return j.dump(1);
}

void write_scenario(const std::filesystem::path& path, const Scenario& scenario) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << dump_scenario(scenario) << '\n';
}

std::vector<IpEntry> watchlist_from_scenario(const Scenario& scenario, double initial_score) {
  std::vector<IpEntry> out;
  out.reserve(scenario.hosts.size());
  for (const auto& h : scenario.hosts) {
    out.push_back(IpEntry{h.address, h.county, h.isp, initial_score, 0, false});
  }
  return out;
}

std::string county_label(std::size_t index) {
  std::string digits = std::to_string(index + 1);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "C" + digits;
}

Scenario generate_scenario(const ScenarioParams& p) {
  if (p.counties == 0 || p.ips_per_county == 0 || p.isps.empty()) {
    throw ConfigError("scenario needs at least one county, address and ISP");
  }
  if (p.ips_per_county >= 4096 || p.counties > 4000) {
    throw ConfigError("scenario address plan supports < 4096 addresses per county");
  }
  const std::size_t injected = p.power_outages + p.partial_power_outages + p.internet_outages;
  if (injected > p.counties) throw ConfigError("more injections than counties");
  if (p.min_outage_ticks <= 0 || p.max_outage_ticks < p.min_outage_ticks) {
    throw ConfigError("bad outage length range");
  }
  const Tick earliest = p.warmup_ticks + p.lead_ticks;
  const Tick latest = p.duration_ticks - p.max_outage_ticks;
  if (injected > 0 && latest < earliest) {
    throw ConfigError("duration too short for the requested injections");
  }

  rng::SplitMix gen(rng::subseed(p.seed, "scenario"));
  Scenario s;
  s.seed = p.seed;
  s.duration_ticks = p.duration_ticks;
  s.hosts.reserve(p.counties * p.ips_per_county);
  constexpr std::uint32_t kBase = (24u << 24);
  for (std::size_t c = 0; c < p.counties; ++c) {
    const auto county = county_label(c);
    for (std::size_t i = 0; i < p.ips_per_county; ++i) {
      ScenarioHost h;
      h.address = Ipv4Address{kBase + static_cast<std::uint32_t>(c * 4096 + i + 1)};
      h.county = county;
      h.isp = p.isps[gen.below(p.isps.size())];
      h.base_response_prob = gen.uniform(p.min_response_prob, p.max_response_prob);
      s.hosts.push_back(std::move(h));
    }
  }

  // Distinct counties for the injections, drawn by partial Fisher-Yates.
  std::vector<std::size_t> order(p.counties);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < injected; ++i) {
    std::swap(order[i], order[i + gen.below(p.counties - i)]);
  }

  auto window = [&] {
    const Tick len = p.min_outage_ticks +
                     static_cast<Tick>(gen.below(static_cast<std::uint64_t>(
                         p.max_outage_ticks - p.min_outage_ticks + 1)));
    const Tick start =
        earliest + static_cast<Tick>(gen.below(static_cast<std::uint64_t>(latest - earliest + 1)));
    return std::pair{start, start + len};
  };

  std::size_t next = 0;
  for (std::size_t i = 0; i < p.power_outages; ++i) {
    auto [start, end] = window();
    s.injections.push_back({start, end, county_label(order[next++]), InjectionKind::Power,
                            std::nullopt, 1.0});
  }
  for (std::size_t i = 0; i < p.partial_power_outages; ++i) {
    auto [start, end] = window();
    const double f = gen.uniform(p.min_partial_fraction, p.max_partial_fraction);
    s.injections.push_back({start, end, county_label(order[next++]), InjectionKind::Power,
                            std::nullopt, f});
  }
  for (std::size_t i = 0; i < p.internet_outages; ++i) {
    auto [start, end] = window();
    const auto& isp = p.isps[gen.below(p.isps.size())];
    s.injections.push_back({start, end, county_label(order[next++]), InjectionKind::Internet,
                            isp, 1.0});
  }
  s.validate();
  return s;
}

}  // namespace powerwatch
