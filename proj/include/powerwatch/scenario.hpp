#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "powerwatch/model.hpp"

namespace powerwatch {

// Scenario files are JSON objects carrying `"format": 1`:
//
//   {"format": 1, "seed": 7, "duration_ticks": 10800,
//    "ips": [{"address": "24.0.0.1", "county": "C001", "isp": "isp-a",
//             "base_response_prob": 0.8}, ...],
//    "injections": [{"start_tick": 2000, "end_tick": 3440, "county": "C001",
//                    "kind": "POWER", "scope": "ALL_ISPS", "fraction": 1.0},
//                   {"start_tick": 4000, "end_tick": 4600, "county": "C002",
//                    "kind": "INTERNET", "scope": "ISP", "isp": "isp-b"}]}
inline constexpr int kScenarioFormat = 1;

Scenario read_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text);
std::string dump_scenario(const Scenario& scenario);
void write_scenario(const std::filesystem::path& path, const Scenario& scenario);

// Watchlist rows implied by a scenario's hosts (every host, scores unset).
std::vector<IpEntry> watchlist_from_scenario(const Scenario& scenario, double initial_score);

struct ScenarioParams {
  std::size_t counties = 50;
  std::size_t ips_per_county = 400;
  std::vector<std::string> isps = {"isp-a", "isp-b", "isp-c"};
  double min_response_prob = 0.6;
  double max_response_prob = 0.95;
  Tick warmup_ticks = 720;
  Tick duration_ticks = 720 + 7 * 1440;
  std::uint64_t seed = 1;

  // Each injection lands in a distinct county.
  std::size_t power_outages = 0;
  std::size_t partial_power_outages = 0;
  std::size_t internet_outages = 0;
  Tick min_outage_ticks = 60;
  Tick max_outage_ticks = 1440;
  double min_partial_fraction = 0.5;
  double max_partial_fraction = 0.95;
  // Injections start no earlier than warmup_ticks + lead_ticks.
  Tick lead_ticks = 360;
};

// Synthetic world: counties C001.., addresses allocated per county from
// 24.0.0.0 upward, ISPs assigned uniformly at random, base response
// probabilities uniform in [min, max]. Throws ConfigError for impossible
// parameter combinations.
Scenario generate_scenario(const ScenarioParams& params);

std::string county_label(std::size_t index);

}  // namespace powerwatch
