#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <unistd.h>

#include "powerwatch/errors.hpp"
#include "powerwatch/prober.hpp"
#include "powerwatch/scenario.hpp"

using namespace powerwatch;
namespace fs = std::filesystem;

namespace {

Ipv4Address ip(const char* s) { return *Ipv4Address::parse(s); }

Scenario small_world() {
  Scenario s;
  s.seed = 3;
  s.duration_ticks = 1000;
  for (std::uint32_t i = 0; i < 200; ++i) {
    s.hosts.push_back({Ipv4Address(0x18000001 + i), "A", i % 2 ? "isp-a" : "isp-b", 0.7});
  }
  s.hosts.push_back({ip("25.0.0.1"), "B", "isp-a", 1.0});
  s.hosts.push_back({ip("25.0.0.2"), "B", "isp-b", 0.0});
  return s;
}

fs::path scratch_dir() {
  auto d = fs::temp_directory_path() / ("pw_probe_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

fs::path write_script(const fs::path& dir, const std::string& name, const std::string& body) {
  auto p = dir / name;
  std::ofstream(p) << "#!/bin/sh\n" << body;
  fs::permissions(p, fs::perms::owner_all);
  return p;
}

}  // namespace

TEST_CASE("simulated responses") {
  auto s = small_world();
  s.injections.push_back({100, 200, "B", InjectionKind::Power, std::nullopt, 1.0});
  SimWorld w(s);
  CHECK(w.responds(ip("25.0.0.1"), 50));
  CHECK_FALSE(w.responds(ip("25.0.0.2"), 50));
  CHECK_FALSE(w.responds(ip("25.0.0.1"), 100));
  CHECK_FALSE(w.responds(ip("25.0.0.1"), 199));
  CHECK(w.responds(ip("25.0.0.1"), 200));
  CHECK_FALSE(w.responds(ip("99.0.0.1"), 50));
}

TEST_CASE("internet outage on one isp") {
  auto s = small_world();
  s.injections.push_back({100, 200, "A", InjectionKind::Internet, "isp-a", 1.0});
  SimWorld w(s);
  std::size_t b_up = 0, b_total = 0;
  for (const auto& h : s.hosts) {
    if (h.county != "A") continue;
    for (Tick t = 100; t < 200; t += 7) {
      if (h.isp == "isp-a") {
        CHECK_FALSE(w.responds(h.address, t));
      } else {
        ++b_total;
        b_up += w.responds(h.address, t);
      }
    }
  }
  CHECK(std::abs(double(b_up) / b_total - 0.7) < 0.03);
  CHECK(w.ground_truth("A", 150) == TruthState::InternetOut);
  CHECK(w.power_fraction_out("A", 150) == 0.0);
}

TEST_CASE("ground truth") {
  auto s = small_world();
  s.injections.push_back({100, 200, "A", InjectionKind::Power, std::nullopt, 1.0});
  s.injections.push_back({150, 300, "A", InjectionKind::Internet, "isp-a", 1.0});
  SimWorld w(s);
  CHECK(w.ground_truth("A", 99) == TruthState::Healthy);
  CHECK(w.ground_truth("A", 100) == TruthState::PowerOut);
  CHECK(w.ground_truth("A", 170) == TruthState::PowerOut);
  CHECK(w.ground_truth("A", 200) == TruthState::InternetOut);
  CHECK(w.ground_truth("A", 300) == TruthState::Healthy);
  CHECK(w.ground_truth("B", 150) == TruthState::Healthy);
  CHECK_THROWS_AS(w.ground_truth("Z", 0), UnknownRegion);
  CHECK(w.counties() == std::vector<County>{"A", "B"});
}

TEST_CASE("partial power outage hits about the stated share") {
  auto s = small_world();
  s.injections.push_back({100, 200, "A", InjectionKind::Power, std::nullopt, 0.6});
  SimWorld w(s);
  std::size_t dark = 0;
  for (const auto& h : s.hosts) {
    if (h.county != "A") continue;
    bool any = false;
    for (Tick t = 100; t < 200; ++t) any = any || w.responds(h.address, t);
    dark += !any;
  }
  CHECK(std::abs(dark / 200.0 - 0.6) < 0.1);
  CHECK(w.power_fraction_out("A", 150) == 0.6);
  CHECK(w.power_fraction_out("A", 250) == 0.0);
}

TEST_CASE("property: simulated probing is deterministic and complete") {
  auto s = small_world();
  SimWorld w1(s), w2(s);
  SimulatedBackend b1(w1), b2(w2);
  std::vector<Ipv4Address> addrs;
  for (const auto& h : s.hosts) addrs.push_back(h.address);
  for (Tick t = 0; t < 50; ++t) {
    auto o1 = b1.probe({addrs, t, 1});
    auto o2 = b2.probe({addrs, t, 1});
    CHECK(o1 == o2);
    REQUIRE(o1.size() == addrs.size());
    for (std::size_t i = 0; i < addrs.size(); ++i) {
      CHECK(o1[i].address == addrs[i]);
      CHECK(o1[i].tick == t);
    }
  }
  auto other = s;
  other.seed = 4;
  SimWorld w3(other);
  std::size_t differ = 0;
  for (auto a : addrs) differ += w1.responds(a, 7) != w3.responds(a, 7);
  CHECK(differ > 0);
}

TEST_CASE("probe request validation") {
  CHECK_THROWS(ProbeRequest{{}, 0, 1}.validate());
  CHECK_THROWS(ProbeRequest{{ip("1.1.1.1"), ip("1.1.1.1")}, 0, 1}.validate());
  CHECK_NOTHROW(ProbeRequest{{ip("1.1.1.1")}, 0, 1}.validate());
}

TEST_CASE("external scanner adapter") {
  const auto dir = scratch_dir();
  // Reports addresses with an odd last octet as up; echoes its arguments.
  const auto scanner = write_script(
      dir, "scanner.sh",
      "while [ $# -gt 0 ]; do case \"$1\" in --targets) f=$2; shift;; --timeout) t=$2; shift;; "
      "--rate) r=$2; shift;; esac; shift; done\n"
      "echo \"$t $r\" > \"$(dirname \"$0\")/args.txt\"\n"
      "while read a; do case \"$a\" in *[13579]) echo \"$a 1\";; *) echo \"$a 0\";; esac; done < \"$f\"\n"
      "echo garbage line here\n");
  ExternalScannerBackend b({scanner.string(), 60.0, 500.0, dir});
  auto out = b.probe({{ip("24.0.0.1"), ip("24.0.0.2"), ip("24.0.0.3")}, 5, 1});
  REQUIRE(out.size() == 3);
  CHECK(out[0].responded);
  CHECK_FALSE(out[1].responded);
  CHECK(out[2].responded);
  CHECK(out[0].tick == 5);
  std::ifstream args(dir / "args.txt");
  std::string timeout, rate;
  args >> timeout >> rate;
  CHECK(timeout == "60");
  CHECK(rate == "500");

  // addresses the scanner never mentions count as down
  const auto silent = write_script(dir, "silent.sh", "exit 0\n");
  ExternalScannerBackend quiet({silent.string(), 60.0, 500.0, dir});
  auto none = quiet.probe({{ip("24.0.0.1")}, 0, 1});
  CHECK_FALSE(none[0].responded);

  const auto failing = write_script(dir, "fail.sh", "echo boom >&2\nexit 3\n");
  ExternalScannerBackend bad({failing.string(), 60.0, 500.0, dir});
  CHECK_THROWS_AS(bad.probe({{ip("24.0.0.1")}, 0, 1}), BackendError);

  CHECK_THROWS_AS(ExternalScannerBackend({"", 60.0, 1.0, dir}), ConfigError);

  // no target files are left behind
  for (const auto& e : fs::directory_iterator(dir)) {
    CHECK(e.path().filename().string().rfind("powerwatch-targets", 0) != 0);
  }
  fs::remove_all(dir);
}

TEST_CASE("scenario json round trip") {
  auto s = small_world();
  s.injections.push_back({100, 200, "A", InjectionKind::Power, std::nullopt, 0.75});
  s.injections.push_back({300, 400, "B", InjectionKind::Internet, "isp-b", 1.0});
  auto back = parse_scenario(dump_scenario(s));
  CHECK(back.seed == s.seed);
  CHECK(back.duration_ticks == s.duration_ticks);
  REQUIRE(back.hosts.size() == s.hosts.size());
  CHECK(back.hosts[5].address == s.hosts[5].address);
  CHECK(back.hosts[5].isp == s.hosts[5].isp);
  CHECK(back.hosts[5].base_response_prob == s.hosts[5].base_response_prob);
  REQUIRE(back.injections.size() == 2);
  CHECK(back.injections[0].fraction == 0.75);
  CHECK_FALSE(back.injections[0].isp);
  CHECK(back.injections[1].isp == "isp-b");
  CHECK(back.injections[1].kind == InjectionKind::Internet);
}

TEST_CASE("scenario validation") {
  const std::string head = R"({"format":1,"seed":1,"duration_ticks":100,"ips":[)"
                           R"({"address":"24.0.0.1","county":"A","isp":"x","base_response_prob":0.5}],)";
  CHECK_NOTHROW(parse_scenario(head + R"("injections":[]})"));
  // power must cover every ISP
  CHECK_THROWS_AS(parse_scenario(head + R"("injections":[{"start_tick":1,"end_tick":5,"county":"A",)"
                                        R"("kind":"POWER","scope":"ISP","isp":"x"}]})"),
                  ParseError);
  // internet must name one ISP
  CHECK_THROWS_AS(parse_scenario(head + R"("injections":[{"start_tick":1,"end_tick":5,"county":"A",)"
                                        R"("kind":"INTERNET","scope":"ALL_ISPS"}]})"),
                  ParseError);
  // beyond the run
  CHECK_THROWS_AS(parse_scenario(head + R"("injections":[{"start_tick":1,"end_tick":500,"county":"A",)"
                                        R"("kind":"POWER","scope":"ALL_ISPS"}]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_scenario("{not json"), ParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"format":2,"seed":1,"duration_ticks":1,"ips":[]})"), ParseError);
  CHECK_THROWS_AS(parse_scenario(R"({"format":1,"seed":1,"duration_ticks":1,"ips":[)"
                                 R"({"address":"24.0.0.300","county":"A","isp":"x","base_response_prob":0.5}]})"),
                  ParseError);
}

TEST_CASE("generated scenarios") {
  ScenarioParams p;
  p.counties = 12;
  p.ips_per_county = 50;
  p.power_outages = 3;
  p.partial_power_outages = 2;
  p.internet_outages = 3;
  p.seed = 99;
  auto s = generate_scenario(p);
  CHECK(s.hosts.size() == 600);
  CHECK(s.injections.size() == 8);
  std::set<County> injected;
  for (const auto& inj : s.injections) {
    CHECK(injected.insert(inj.county).second);
    CHECK(inj.start_tick >= p.warmup_ticks + p.lead_ticks);
    CHECK(inj.end_tick <= p.duration_ticks);
    CHECK(inj.end_tick - inj.start_tick >= p.min_outage_ticks);
    CHECK(inj.end_tick - inj.start_tick <= p.max_outage_ticks);
    if (inj.fraction < 1.0) {
      CHECK(inj.fraction >= p.min_partial_fraction);
      CHECK(inj.fraction <= p.max_partial_fraction);
    }
  }
  std::set<Ipv4Address> addrs;
  for (const auto& h : s.hosts) {
    CHECK(addrs.insert(h.address).second);
    CHECK(h.base_response_prob >= p.min_response_prob);
    CHECK(h.base_response_prob <= p.max_response_prob);
  }
  CHECK(dump_scenario(generate_scenario(p)) == dump_scenario(s));

  p.internet_outages = 20;
  CHECK_THROWS_AS(generate_scenario(p), ConfigError);
}
