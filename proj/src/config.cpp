#include "powerwatch/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "powerwatch/errors.hpp"
#include "powerwatch/text.hpp"

namespace powerwatch {

std::optional<RunMode> run_mode_from_string(std::string_view s) {
  if (s == "simulate") return RunMode::Simulate;
  if (s == "live") return RunMode::Live;
  if (s == "evaluate") return RunMode::Evaluate;
  return std::nullopt;
}

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Simulate: return "simulate";
    case RunMode::Live: return "live";
    case RunMode::Evaluate: return "evaluate";
  }
  return "unknown";
}

double RunConfig::effective_eval_tau() const {
  if (eval_tau) return *eval_tau;
  if (detector.tau_report.empty()) return detector.tau_gate;
  return *std::min_element(detector.tau_report.begin(), detector.tau_report.end());
}

void RunConfig::validate() const {
  detector.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
  if (!(initial_score >= 0.0 && initial_score <= 1.0)) {
    throw ConfigError("initial_score must lie in [0,1]");
  }
  if (warmup_ticks < 0) throw ConfigError("warmup_ticks must be non-negative");
  if (slow_period_minutes <= 0) throw ConfigError("slow_period_minutes must be positive");
  if (snapshot_every < 0) throw ConfigError("snapshot_every must be non-negative");
  if (workers == 0) throw ConfigError("workers must be at least 1");
  if (!(truth_threshold > 0.0 && truth_threshold < 1.0)) {
    throw ConfigError("eval.threshold must lie in (0,1)");
  }
  if (buffer_minutes < 0) throw ConfigError("eval.buffer_minutes must be non-negative");
  if (eval_stride_minutes <= 0) throw ConfigError("eval.stride_minutes must be positive");
  if (mode != RunMode::Evaluate && output_dir.empty()) {
    throw ConfigError("output_dir is required");
  }

  switch (mode) {
    case RunMode::Simulate: {
      if (scenario_path.empty()) throw ConfigError("simulate mode needs scenario");
      const double tau = effective_eval_tau();
      const auto& reports = detector.tau_report;
      const bool tracked = reports.empty() ? tau == detector.tau_gate
                                           : std::find(reports.begin(), reports.end(), tau) !=
                                                 reports.end();
      if (!tracked) throw ConfigError("eval.tau must be one of detector.tau_report");
      break;
    }
    case RunMode::Live:
      if (watchlist_path.empty()) throw ConfigError("live mode needs watchlist");
      if (scanner_command.empty()) throw ConfigError("live mode needs live.scanner");
      if (!(rate_cap > 0.0)) throw ConfigError("live.rate_cap must be positive");
      if (!(live_tick_seconds > 0.0)) throw ConfigError("live.tick_seconds must be positive");
      if (max_ticks < 0) throw ConfigError("live.max_ticks must be non-negative");
      break;
    case RunMode::Evaluate:
      if (events_path.empty()) throw ConfigError("evaluate mode needs events");
      if (utility_csv_path.empty()) throw ConfigError("evaluate mode needs utility_csv");
      break;
  }
}

namespace {

ConfigValue parse_value(std::string_view raw, std::size_t line_no) {
  const auto where = "config line " + std::to_string(line_no);
  if (raw.empty()) throw ConfigError(where + ": missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') throw ConfigError(where + ": unterminated string");
    return std::string(raw.substr(1, raw.size() - 2));
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (raw.front() == '[') {
    if (raw.back() != ']') throw ConfigError(where + ": unterminated array");
    std::vector<double> out;
    const auto body = text::trim(raw.substr(1, raw.size() - 2));
    if (body.empty()) return out;
    for (const auto& item : text::split(body, ',')) {
      auto v = text::parse_double(item);
      if (!v) throw ConfigError(where + ": arrays may only hold numbers");
      out.push_back(*v);
    }
    return out;
  }
  if (auto v = text::parse_double(raw)) return *v;
  throw ConfigError(where + ": cannot parse value '" + std::string(raw) + "'");
}

// Strip a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

}  // namespace

std::map<std::string, ConfigValue> parse_config_text(const std::string& text_in) {
  std::map<std::string, ConfigValue> out;
  std::istringstream in(text_in);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": bad section");
      section = std::string(text::trim(t.substr(1, t.size() - 2)));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = std::string(text::trim(t.substr(0, eq)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    const auto full = section.empty() ? key : section + "." + key;
    if (out.contains(full)) throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key " + full);
    out.emplace(full, parse_value(text::trim(t.substr(eq + 1)), line_no));
  }
  return out;
}

RunConfig config_from_values(const std::map<std::string, ConfigValue>& values,
                             const std::filesystem::path& base_dir) {
  RunConfig cfg;
  for (const auto& [key, value] : values) {
    auto str = [&]() -> std::string {
      if (auto s = std::get_if<std::string>(&value)) return *s;
      throw ConfigError(key + " must be a string");
    };
    auto path = [&]() -> std::filesystem::path {
      std::filesystem::path p = str();
      return p.is_relative() ? base_dir / p : p;
    };
    auto num = [&]() -> double {
      if (auto d = std::get_if<double>(&value)) return *d;
      throw ConfigError(key + " must be a number");
    };
    auto integer = [&]() -> std::int64_t {
      const double d = num();
      if (std::floor(d) != d) throw ConfigError(key + " must be an integer");
      return static_cast<std::int64_t>(d);
    };
    auto count = [&]() -> std::size_t {
      const auto i = integer();
      if (i < 0) throw ConfigError(key + " must be non-negative");
      return static_cast<std::size_t>(i);
    };
    auto boolean = [&]() -> bool {
      if (auto b = std::get_if<bool>(&value)) return *b;
      throw ConfigError(key + " must be true or false");
    };

    if (key == "mode") {
      auto m = run_mode_from_string(str());
      if (!m) throw ConfigError("mode must be simulate, live or evaluate");
      cfg.mode = *m;
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(count());
    } else if (key == "output_dir") {
      cfg.output_dir = path();
    } else if (key == "watchlist") {
      cfg.watchlist_path = path();
    } else if (key == "blacklist") {
      cfg.blacklist_path = path();
    } else if (key == "blacklist_reserved") {
      cfg.blacklist_reserved = boolean();
    } else if (key == "scenario") {
      cfg.scenario_path = path();
    } else if (key == "utility_csv") {
      cfg.utility_csv_path = path();
    } else if (key == "events") {
      cfg.events_path = path();
    } else if (key == "universe") {
      cfg.universe_path = path();
    } else if (key == "restore_scores") {
      cfg.restore_scores_path = path();
    } else if (key == "alpha") {
      cfg.alpha = num();
    } else if (key == "initial_score") {
      cfg.initial_score = num();
    } else if (key == "warmup_ticks") {
      cfg.warmup_ticks = integer();
    } else if (key == "slow_period_minutes") {
      cfg.slow_period_minutes = integer();
    } else if (key == "max_commands_per_tick") {
      cfg.max_commands_per_tick = count();
    } else if (key == "snapshot_every") {
      cfg.snapshot_every = integer();
    } else if (key == "workers") {
      cfg.workers = count();
    } else if (key == "detector.tau_gate") {
      cfg.detector.tau_gate = num();
    } else if (key == "detector.tau_report") {
      if (auto v = std::get_if<std::vector<double>>(&value)) {
        cfg.detector.tau_report = *v;
      } else {
        cfg.detector.tau_report = {num()};
      }
    } else if (key == "detector.ewma_bias") {
      cfg.detector.ewma_bias = num();
    } else if (key == "detector.min_isp_samples") {
      cfg.detector.min_isp_samples = count();
    } else if (key == "eval.tau") {
      cfg.eval_tau = num();
    } else if (key == "eval.threshold") {
      cfg.truth_threshold = num();
    } else if (key == "eval.buffer_minutes") {
      cfg.buffer_minutes = integer();
    } else if (key == "eval.stride_minutes") {
      cfg.eval_stride_minutes = integer();
    } else if (key == "live.scanner") {
      cfg.scanner_command = str();
    } else if (key == "live.rate_cap") {
      cfg.rate_cap = num();
    } else if (key == "live.tick_seconds") {
      cfg.live_tick_seconds = num();
    } else if (key == "live.max_ticks") {
      cfg.max_ticks = integer();
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_values(parse_config_text(buf.str()), path.parent_path());
}

}  // namespace powerwatch
