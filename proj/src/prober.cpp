#include "powerwatch/prober.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>
#include <unordered_set>

#include "powerwatch/errors.hpp"
#include "powerwatch/rng.hpp"
#include "powerwatch/text.hpp"

namespace powerwatch {

namespace {

constexpr std::uint64_t kProbeStream = rng::fnv1a("probe");
constexpr std::uint64_t kAffectStream = rng::fnv1a("affected");

}  // namespace

void ProbeRequest::validate() const {
  if (addresses.empty()) throw std::invalid_argument("probe request has no addresses");
  std::unordered_set<Ipv4Address> seen;
  for (auto a : addresses) {
    if (!seen.insert(a).second) {
      throw std::invalid_argument("duplicate address in probe request: " + a.to_string());
    }
  }
}

std::string_view to_string(TruthState s) {
  switch (s) {
    case TruthState::Healthy: return "healthy";
    case TruthState::PowerOut: return "power_out";
    case TruthState::InternetOut: return "internet_out";
  }
  return "unknown";
}

SimWorld::SimWorld(Scenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
  host_index_.reserve(scenario_.hosts.size());
  for (std::size_t i = 0; i < scenario_.hosts.size(); ++i) {
    host_index_.emplace(scenario_.hosts[i].address, i);
    injections_by_county_.try_emplace(scenario_.hosts[i].county);
  }
  for (std::size_t i = 0; i < scenario_.injections.size(); ++i) {
    injections_by_county_[scenario_.injections[i].county].push_back(i);
  }
}

std::vector<County> SimWorld::counties() const {
  std::vector<County> out;
  for (const auto& [c, _] : injections_by_county_) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

bool SimWorld::affected_by(Ipv4Address address, std::size_t injection_index) const {
  const auto& inj = scenario_.injections[injection_index];
  if (inj.fraction >= 1.0) return true;
  const auto h = rng::mix(scenario_.seed, kAffectStream, address.value, injection_index);
  return rng::to_unit(h) < inj.fraction;
}

bool SimWorld::responds(Ipv4Address address, Tick tick) const {
  auto it = host_index_.find(address);
  if (it == host_index_.end()) return false;
  const auto& host = scenario_.hosts[it->second];

  auto inj_it = injections_by_county_.find(host.county);
  if (inj_it != injections_by_county_.end()) {
    for (auto idx : inj_it->second) {
      const auto& inj = scenario_.injections[idx];
      if (!inj.covers(tick)) continue;
      if (inj.kind == InjectionKind::Power && affected_by(address, idx)) return false;
      if (inj.kind == InjectionKind::Internet && inj.isp == host.isp) return false;
    }
  }
  const auto h = rng::mix(scenario_.seed, kProbeStream, address.value,
                          static_cast<std::uint64_t>(tick));
  return rng::to_unit(h) < host.base_response_prob;
}

TruthState SimWorld::ground_truth(const County& county, Tick tick) const {
  auto it = injections_by_county_.find(county);
  if (it == injections_by_county_.end()) throw UnknownRegion(county);
  bool internet = false;
  for (auto idx : it->second) {
    const auto& inj = scenario_.injections[idx];
    if (!inj.covers(tick)) continue;
    if (inj.kind == InjectionKind::Power) return TruthState::PowerOut;
    internet = true;
  }
  return internet ? TruthState::InternetOut : TruthState::Healthy;
}

double SimWorld::power_fraction_out(const County& county, Tick tick) const {
  auto it = injections_by_county_.find(county);
  if (it == injections_by_county_.end()) throw UnknownRegion(county);
  double out = 0.0;
  for (auto idx : it->second) {
    const auto& inj = scenario_.injections[idx];
    if (inj.kind == InjectionKind::Power && inj.covers(tick)) out = std::max(out, inj.fraction);
  }
  return out;
}

std::vector<ProbeOutcome> SimulatedBackend::probe(const ProbeRequest& request) {
  std::vector<ProbeOutcome> out;
  out.reserve(request.addresses.size());
  for (auto a : request.addresses) out.push_back({a, request.tick, world_.responds(a, request.tick)});
  return out;
}

ExternalScannerBackend::ExternalScannerBackend(ExternalScannerConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.command.empty()) throw ConfigError("external scanner command is empty");
  if (!(cfg_.max_probes_per_second > 0.0)) throw ConfigError("scanner rate cap must be positive");
}

std::vector<ProbeOutcome> ExternalScannerBackend::probe(const ProbeRequest& request) {
  request.validate();
  std::lock_guard lock(mutex_);

  const auto targets = cfg_.work_dir / ("powerwatch-targets-" + std::to_string(::getpid()) + "-" +
                                        std::to_string(round_++) + ".txt");
  {
    std::ofstream out(targets);
    if (!out) throw BackendError("cannot write target list " + targets.string());
    for (auto a : request.addresses) out << a.to_string() << '\n';
  }

  const double timeout = static_cast<double>(request.deadline) * cfg_.seconds_per_tick;
  std::ostringstream cmd;
  cmd << cfg_.command << " --targets '" << targets.string() << "' --timeout "
      << text::exact(timeout) << " --rate " << text::exact(cfg_.max_probes_per_second);

  FILE* pipe = ::popen(cmd.str().c_str(), "r");
  if (pipe == nullptr) {
    std::filesystem::remove(targets);
    throw BackendError("cannot start scanner: " + cfg_.command);
  }
  std::unordered_set<Ipv4Address> up;
  std::string buffer;
  char chunk[4096];
  while (std::fgets(chunk, sizeof chunk, pipe) != nullptr) {
    buffer = chunk;
    auto fields = text::split(text::trim(buffer), ' ');
    if (fields.size() != 2) continue;
    auto addr = Ipv4Address::parse(fields[0]);
    if (addr && fields[1] == "1") up.insert(*addr);
  }
  const int status = ::pclose(pipe);
  std::filesystem::remove(targets);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw BackendError("scanner exited abnormally: " + cfg_.command);
  }

  std::vector<ProbeOutcome> out;
  out.reserve(request.addresses.size());
  for (auto a : request.addresses) out.push_back({a, request.tick, up.contains(a)});
  return out;
}

}  // namespace powerwatch
