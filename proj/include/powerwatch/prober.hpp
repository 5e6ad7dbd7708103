#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "powerwatch/model.hpp"

namespace powerwatch {

struct ProbeRequest {
  std::vector<Ipv4Address> addresses;  // non-empty, no duplicates
  Tick tick = 0;
  Tick deadline = 1;  // ticks allowed for the round

  // Throws std::invalid_argument when empty or duplicated.
  void validate() const;
};

// Uniform probing interface. Implementations return exactly one outcome per
// requested address, in request order.
class ProbeBackend {
 public:
  virtual ~ProbeBackend() = default;
  virtual std::vector<ProbeOutcome> probe(const ProbeRequest& request) = 0;
};

enum class TruthState { Healthy, PowerOut, InternetOut };

std::string_view to_string(TruthState s);

// Scenario-driven world. A host answers with its base probability unless a
// power injection covers it or an Internet injection covers its ISP.
// Responses are a pure function of (seed, address, tick).
class SimWorld {
 public:
  explicit SimWorld(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }

  bool responds(Ipv4Address address, Tick tick) const;

  // Throws UnknownRegion.
  TruthState ground_truth(const County& county, Tick tick) const;

  // Share of the county's addresses without power at tick (largest covering
  // power injection), 0 when none.
  double power_fraction_out(const County& county, Tick tick) const;

  bool knows_county(const County& county) const { return injections_by_county_.contains(county); }
  std::vector<County> counties() const;

 private:
  bool affected_by(Ipv4Address address, std::size_t injection_index) const;

  Scenario scenario_;
  std::unordered_map<Ipv4Address, std::size_t> host_index_;
  std::unordered_map<County, std::vector<std::size_t>> injections_by_county_;
};

class SimulatedBackend : public ProbeBackend {
 public:
  explicit SimulatedBackend(const SimWorld& world) : world_(world) {}
  std::vector<ProbeOutcome> probe(const ProbeRequest& request) override;

 private:
  const SimWorld& world_;
};

struct ExternalScannerConfig {
  // Scanner executable (and any fixed leading arguments). Invoked as
  //   <command> --targets <file> --timeout <seconds> --rate <probes/s>
  // and expected to print `<address> <0|1>` per line on stdout.
  std::string command;
  double seconds_per_tick = 60.0;
  double max_probes_per_second = 10000.0;
  std::filesystem::path work_dir = std::filesystem::temp_directory_path();
};

// Shells out to an installed ICMP scanner. Addresses missing from the
// scanner's output count as non-responding. Calls are serialized.
class ExternalScannerBackend : public ProbeBackend {
 public:
  explicit ExternalScannerBackend(ExternalScannerConfig cfg);
  // Throws BackendError when the scanner cannot be run or exits non-zero.
  std::vector<ProbeOutcome> probe(const ProbeRequest& request) override;

 private:
  ExternalScannerConfig cfg_;
  std::mutex mutex_;
  std::uint64_t round_ = 0;
};

}  // namespace powerwatch
