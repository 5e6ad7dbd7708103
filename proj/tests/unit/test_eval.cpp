#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "powerwatch/errors.hpp"
#include "powerwatch/eval.hpp"
#include "powerwatch/rng.hpp"

using namespace powerwatch;
namespace fs = std::filesystem;

namespace {

GroundTruthSeries series(std::vector<std::pair<Tick, double>> pts) {
  GroundTruthSeries s;
  s.county = "A";
  for (auto [t, f] : pts) s.samples.push_back({t, f});
  return s;
}

// Per-tick expansion of a series: sample i holds on [t_i, t_{i+1}), the last
// one for a single tick.
std::vector<TimeInterval> brute_intervals(const GroundTruthSeries& s, double threshold) {
  std::vector<TimeInterval> out;
  if (s.samples.empty()) return out;
  std::optional<Tick> open;
  const Tick last = s.samples.back().tick;
  std::size_t k = 0;
  for (Tick t = s.samples.front().tick; t <= last; ++t) {
    while (k + 1 < s.samples.size() && s.samples[k + 1].tick <= t) ++k;
    const bool down = s.samples[k].fraction_out >= threshold;
    if (down && !open) open = t;
    if (!down && open) {
      out.push_back({*open, t});
      open.reset();
    }
  }
  if (open) out.push_back({*open, last + 1});
  return out;
}

IntervalsByCounty shifted(const IntervalsByCounty& m, Tick d) {
  IntervalsByCounty out = m;
  for (auto& [c, ivs] : out) {
    for (auto& iv : ivs) {
      iv.start += d;
      iv.end += d;
    }
  }
  return out;
}

IntervalsByCounty random_intervals(rng::SplitMix& g, const std::set<County>& universe) {
  IntervalsByCounty out;
  for (const auto& c : universe) {
    Tick t = static_cast<Tick>(g.below(2000));
    const auto k = g.below(3);
    for (std::uint64_t i = 0; i < k; ++i) {
      const Tick len = 1 + static_cast<Tick>(g.below(600));
      out[c].push_back({t, t + len});
      t += len + static_cast<Tick>(g.below(1500));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("truth intervals") {
  CHECK(truth_outage_intervals(series({{0, 0.0}, {10, 0.0}, {20, 0.0}}), 0.5).empty());
  CHECK(truth_outage_intervals(series({{0, 1.0}, {10, 1.0}, {20, 1.0}}), 0.5) ==
        std::vector<TimeInterval>{{0, 21}});
  CHECK(truth_outage_intervals(series({{0, 0.1}, {10, 0.7}, {20, 0.6}, {30, 0.2}, {40, 0.0}}), 0.5) ==
        std::vector<TimeInterval>{{10, 30}});
  CHECK(truth_outage_intervals(GroundTruthSeries{}, 0.5).empty());
  // exactly at the threshold counts as out
  CHECK(truth_outage_intervals(series({{0, 0.5}, {10, 0.0}}), 0.5) ==
        std::vector<TimeInterval>{{0, 10}});
  CHECK_THROWS_AS(truth_outage_intervals(series({{0, 1.0}}), 0.0), std::domain_error);
  CHECK_THROWS_AS(truth_outage_intervals(series({{0, 1.0}}), 1.0), std::domain_error);
}

TEST_CASE("property: truth intervals match a per-tick recount") {
  rng::SplitMix g(12);
  for (int trial = 0; trial < 300; ++trial) {
    GroundTruthSeries s;
    Tick t = static_cast<Tick>(g.below(50));
    const auto n = g.below(30);
    for (std::uint64_t i = 0; i < n; ++i) {
      s.samples.push_back({t, g.below(3) == 0 ? g.uniform() : (g.below(2) ? 1.0 : 0.0)});
      t += 1 + static_cast<Tick>(g.below(15));
    }
    const double threshold = 0.05 + 0.9 * g.uniform();
    CHECK(truth_outage_intervals(s, threshold) == brute_intervals(s, threshold));
  }
}

TEST_CASE("confusion labels") {
  const std::set<County> u{"A", "B", "C", "D"};
  IntervalsByCounty det{{"A", {{100, 200}}}, {"B", {{100, 200}}}};
  IntervalsByCounty tru{{"A", {{100, 200}}}, {"C", {{100, 200}}}};
  auto labels = confusion_labels(det, tru, u, 360);
  CHECK(labels.at("A") == CountyLabel::TruePositive);
  CHECK(labels.at("B") == CountyLabel::FalsePositive);
  CHECK(labels.at("C") == CountyLabel::FalseNegative);
  CHECK(labels.at("D") == CountyLabel::TrueNegative);
  CHECK(confusion(det, tru, u, 360) == ConfusionCounts{1, 1, 1, 1});

  // a detection five hours early still matches within a six-hour buffer
  IntervalsByCounty early{{"A", {{100, 130}}}};
  IntervalsByCounty later{{"A", {{100 + 300, 700}}}};
  CHECK(confusion_labels(early, later, {"A"}, 360).at("A") == CountyLabel::TruePositive);
  // but not seven hours early
  IntervalsByCounty too_early{{"A", {{0, 10}}}};
  IntervalsByCounty late{{"A", {{430, 500}}}};
  CHECK(confusion_labels(too_early, late, {"A"}, 360).at("A") == CountyLabel::FalsePositive);
  // overlap always matches, even with no buffer
  CHECK(confusion_labels({{"A", {{100, 200}}}}, tru, {"A", "C"}, 0).at("A") ==
        CountyLabel::TruePositive);

  CHECK_THROWS_AS(confusion({{"Z", {{0, 1}}}}, {}, u, 360), UnknownRegion);
}

TEST_CASE("windows clip intervals") {
  IntervalsByCounty det{{"A", {{100, 200}}}};
  IntervalsByCounty tru{{"A", {{1500, 1600}}}};
  const std::set<County> u{"A"};
  auto w = windowed_confusion(det, tru, u, 360, 0, 2880, 1440);
  REQUIRE(w.size() == 2);
  CHECK(w[0].counts == ConfusionCounts{0, 1, 0, 0});
  CHECK(w[1].counts == ConfusionCounts{0, 0, 1, 0});
  CHECK(w[1].window.start == 1440);
  CHECK(w[1].window.end == 2880);
}

TEST_CASE("property: counts cover the universe and survive time shifts") {
  rng::SplitMix g(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::set<County> u;
    const auto n = 1 + g.below(20);
    for (std::uint64_t i = 0; i < n; ++i) u.insert("C" + std::to_string(i));
    const auto det = random_intervals(g, u);
    const auto tru = random_intervals(g, u);
    const Tick buffer = static_cast<Tick>(g.below(720));
    const auto c = confusion(det, tru, u, buffer);
    CHECK(c.total() == u.size());

    const Tick d = static_cast<Tick>(g.below(100000));
    CHECK(confusion(shifted(det, d), shifted(tru, d), u, buffer) == c);

    // a wider buffer can only turn mismatches into matches
    const auto wider = confusion(det, tru, u, buffer + 1 + static_cast<Tick>(g.below(500)));
    CHECK(wider.tp >= c.tp);
    CHECK(wider.tn == c.tn);
    CHECK(wider.tp + wider.fp + wider.fn == c.tp + c.fp + c.fn);

    for (const auto& wc : windowed_confusion(det, tru, u, buffer, 0, 5000, 1000)) {
      CHECK(wc.counts.total() == u.size());
    }

    const auto m = metrics(c);
    for (const auto& v : {m.accuracy, m.fpr, m.false_omission_rate}) {
      if (v) {
        CHECK(*v >= 0.0);
        CHECK(*v <= 1.0);
      }
    }
  }
}

TEST_CASE("metrics") {
  auto m = metrics({4, 4, 5, 87});
  CHECK(*m.accuracy == doctest::Approx(0.91).epsilon(1e-12));
  CHECK(*m.fpr == doctest::Approx(0.04395604395604396).epsilon(1e-12));
  CHECK(*m.false_omission_rate == doctest::Approx(0.05434782608695652).epsilon(1e-12));

  m = metrics({3, 0, 0, 5});
  CHECK(*m.accuracy == 1.0);
  CHECK(*m.fpr == 0.0);
  CHECK(*m.false_omission_rate == 0.0);

  m = metrics({0, 2, 0, 0});
  CHECK(*m.fpr == 1.0);
  CHECK_FALSE(m.false_omission_rate);

  m = metrics({});
  CHECK_FALSE(m.accuracy);
  CHECK_FALSE(m.fpr);
  CHECK_FALSE(m.false_omission_rate);
}

TEST_CASE("event intervals") {
  OutageEvent closed;
  closed.start_tick = 10;
  closed.end_tick = 20;
  CHECK(to_interval(closed, 100) == TimeInterval{10, 20});
  OutageEvent open;
  open.start_tick = 50;
  CHECK(to_interval(open, 100) == TimeInterval{50, 100});
  CHECK(to_interval(open, 10) == TimeInterval{50, 51});
}

TEST_CASE("utility csv") {
  const auto dir = fs::temp_directory_path() / ("pw_eval_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  std::map<County, GroundTruthSeries> s;
  s["A"] = series({{0, 0.0}, {10, 0.75}, {20, 0.0}});
  s["A"].county = "A";
  write_utility_csv(dir / "u.csv", s);
  auto back = read_utility_csv(dir / "u.csv");
  REQUIRE(back.size() == 1);
  REQUIRE(back.at("A").samples.size() == 3);
  CHECK(back.at("A").samples[1].fraction_out == 0.75);
  CHECK(back.at("A").source == TruthSource::UtilityCsv);

  std::ofstream(dir / "gaps.csv") << "county,tick,customers_tracked,customers_out\n"
                                     "B,30,100,0\nB,0,100,60\nB,10,0,0\nC,0,50,50\n";
  std::size_t skipped = 0, gaps = 0;
  auto g = read_utility_csv(dir / "gaps.csv", &skipped, &gaps);
  CHECK(skipped == 1);
  CHECK(gaps == 1);
  REQUIRE(g.at("B").samples.size() == 2);
  CHECK(g.at("B").samples[0].tick == 0);
  CHECK(g.at("B").samples[0].fraction_out == 0.6);
  CHECK(g.at("C").samples[0].fraction_out == 1.0);

  std::ofstream(dir / "bad.csv") << "county,tick,customers_tracked,customers_out\nB,x,100,0\n";
  CHECK_THROWS_AS(read_utility_csv(dir / "bad.csv"), ParseError);
  std::ofstream(dir / "hdr.csv") << "county,time,tracked,out\n";
  CHECK_THROWS_AS(read_utility_csv(dir / "hdr.csv"), ParseError);
  fs::remove_all(dir);
}

TEST_CASE("report writers") {
  std::ostringstream txt;
  write_metrics_text(txt, {1, 0, 0, 1}, metrics({1, 0, 0, 1}), 360, 0.5, 0.15);
  CHECK(txt.str().find("accuracy      1.000000") != std::string::npos);
  std::ostringstream csv;
  write_metrics_csv(csv, {{{0, 1440}, {0, 0, 0, 0}}});
  CHECK(csv.str() == "window_start,window_end,tp,fp,fn,tn,accuracy,fpr,for\n0,1440,0,0,0,0,,,\n");
  std::ostringstream ts;
  write_detection_timeseries(ts, {{"A", {{0, 10}}}}, {}, {"A", "B"}, 0, 20, 10);
  CHECK(ts.str() == "tick,detected_fraction,truth_fraction\n0,0.500000,0.000000\n10,0.000000,0.000000\n");
}
