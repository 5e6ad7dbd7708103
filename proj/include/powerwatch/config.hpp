#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "powerwatch/detector.hpp"
#include "powerwatch/model.hpp"

namespace powerwatch {

enum class RunMode { Simulate, Live, Evaluate };

std::optional<RunMode> run_mode_from_string(std::string_view s);
std::string_view to_string(RunMode m);

struct RunConfig {
  RunMode mode = RunMode::Simulate;
  std::filesystem::path watchlist_path;   // optional in simulate mode
  std::filesystem::path blacklist_path;   // optional
  bool blacklist_reserved = true;
  std::filesystem::path scenario_path;    // simulate
  std::filesystem::path utility_csv_path; // evaluate
  std::filesystem::path events_path;      // evaluate
  std::filesystem::path universe_path;    // evaluate, optional county list
  std::filesystem::path restore_scores_path;
  std::filesystem::path output_dir = "powerwatch-out";

  DetectorConfig detector;
  double alpha = 0.01;
  double initial_score = 0.5;
  Tick warmup_ticks = 720;
  Tick slow_period_minutes = 360;
  std::size_t max_commands_per_tick = 0;
  Tick snapshot_every = 0;  // 0: final snapshot only
  std::size_t workers = 1;
  std::uint64_t seed = 1;

  // Evaluation.
  std::optional<double> eval_tau;  // defaults to the smallest report threshold
  double truth_threshold = 0.5;
  Tick buffer_minutes = 360;
  Tick eval_stride_minutes = 1440;

  // Live operation.
  std::string scanner_command;
  double rate_cap = 10000.0;  // probes per second handed to the scanner
  double live_tick_seconds = 60.0;
  Tick max_ticks = 0;  // 0: run until interrupted

  double effective_eval_tau() const;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Minimal TOML-style reader: `key = value` lines, `[section]` headers that
// prefix keys with `section.`, `#` comments, and values that are quoted
// strings, numbers, booleans, or flat arrays of numbers.
using ConfigValue = std::variant<std::string, double, bool, std::vector<double>>;
std::map<std::string, ConfigValue> parse_config_text(const std::string& text);

// Relative paths resolve against the config file's directory. Unknown keys
// are rejected.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_values(const std::map<std::string, ConfigValue>& values,
                             const std::filesystem::path& base_dir);

}  // namespace powerwatch
