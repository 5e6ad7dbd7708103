// powerwatch: command-line front end.
//
//   powerwatch run --config run.toml [--mode simulate|live|evaluate] [--seed N] [--output-dir D]
//   powerwatch eval --events events.jsonl --truth utility.csv [--tau T] [--universe counties.txt]
//   powerwatch gen-scenario --out-dir D [--counties N] [--ips N] [--power N] ...

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "powerwatch/app.hpp"
#include "powerwatch/errors.hpp"
#include "powerwatch/scenario.hpp"
#include "powerwatch/watchlist.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

int config_failure(const std::exception& e) {
  std::cerr << "config error: " << e.what() << '\n';
  return powerwatch::kExitConfig;
}

void write_sample_config(const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "mode = \"simulate\"\n"
         "scenario = \"scenario.json\"\n"
         "watchlist = \"watchlist.csv\"\n"
         "output_dir = \"out\"\n"
         "seed = 1\n"
         "warmup_ticks = 720\n"
         "\n"
         "[detector]\n"
         "tau_gate = 0.07\n"
         "tau_report = [0.15, 0.3]\n"
         "ewma_bias = 0.0\n"
         "min_isp_samples = 5\n"
         "\n"
         "[eval]\n"
         "threshold = 0.5\n"
         "buffer_minutes = 360\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace powerwatch;

  CLI::App app{"Power outage detection from ICMP reachability"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run the detector from a config file");
  std::string config_path;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_option("--mode", mode, "override mode")
      ->check(CLI::IsMember({"simulate", "live", "evaluate"}));
  run_cmd->add_option("--seed", seed, "override seed");
  run_cmd->add_option("--output-dir", output_dir, "override output directory");

  auto* eval_cmd = app.add_subcommand("eval", "score an event log against a utility report");
  RunConfig eval_cfg;
  eval_cfg.mode = RunMode::Evaluate;
  eval_cfg.output_dir.clear();
  std::string events_path, truth_path, universe_path, eval_out;
  std::optional<double> eval_tau;
  eval_cmd->add_option("--events", events_path, "events.jsonl")->required();
  eval_cmd->add_option("--truth", truth_path, "utility outage CSV")->required();
  eval_cmd->add_option("--buffer-minutes", eval_cfg.buffer_minutes, "match buffer")
      ->capture_default_str();
  eval_cmd->add_option("--threshold", eval_cfg.truth_threshold, "outage fraction threshold")
      ->capture_default_str();
  eval_cmd->add_option("--tau", eval_tau, "event threshold to evaluate");
  eval_cmd->add_option("--universe", universe_path, "county list");
  eval_cmd->add_option("--stride-minutes", eval_cfg.eval_stride_minutes, "report window")
      ->capture_default_str();
  eval_cmd->add_option("--output-dir", eval_out, "write report.txt and report.csv here");

  auto* gen_cmd = app.add_subcommand("gen-scenario", "write a synthetic scenario");
  ScenarioParams params;
  std::string gen_out;
  gen_cmd->add_option("--out-dir", gen_out, "output directory")->required();
  gen_cmd->add_option("--counties", params.counties)->capture_default_str();
  gen_cmd->add_option("--ips", params.ips_per_county, "addresses per county")->capture_default_str();
  gen_cmd->add_option("--isps", params.isps)->capture_default_str();
  gen_cmd->add_option("--seed", params.seed)->capture_default_str();
  gen_cmd->add_option("--warmup", params.warmup_ticks)->capture_default_str();
  gen_cmd->add_option("--duration", params.duration_ticks)->capture_default_str();
  gen_cmd->add_option("--power", params.power_outages, "full power outages")->capture_default_str();
  gen_cmd->add_option("--partial", params.partial_power_outages, "partial power outages")
      ->capture_default_str();
  gen_cmd->add_option("--internet", params.internet_outages, "single-ISP outages")
      ->capture_default_str();
  gen_cmd->add_option("--min-length", params.min_outage_ticks)->capture_default_str();
  gen_cmd->add_option("--max-length", params.max_outage_ticks)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (*run_cmd) {
    RunConfig cfg;
    try {
      cfg = load_config(config_path);
      if (!mode.empty()) cfg.mode = *run_mode_from_string(mode);
      if (seed) cfg.seed = *seed;
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      cfg.validate();
    } catch (const Error& e) {
      return config_failure(e);
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    return run(cfg, std::cout, std::cerr, &g_stop);
  }

  if (*eval_cmd) {
    eval_cfg.events_path = events_path;
    eval_cfg.utility_csv_path = truth_path;
    eval_cfg.universe_path = universe_path;
    eval_cfg.output_dir = eval_out;
    eval_cfg.eval_tau = eval_tau;
    return run(eval_cfg, std::cout, std::cerr);
  }

  try {
    const auto scenario = generate_scenario(params);
    const std::filesystem::path dir(gen_out);
    std::filesystem::create_directories(dir);
    write_scenario(dir / "scenario.json", scenario);
    write_watchlist_csv(dir / "watchlist.csv", watchlist_from_scenario(scenario, 0.5));
    write_sample_config(dir / "config.toml");
    std::cout << "wrote " << scenario.hosts.size() << " hosts and " << scenario.injections.size()
              << " injections to " << dir.string() << '\n';
  } catch (const ConfigError& e) {
    return config_failure(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
