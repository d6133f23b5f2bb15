#include <gtest/gtest.h>

#include "gcdistill/ingest.hpp"
#include "gcdistill/scenario.hpp"
#include "gcdistill/simcheck.hpp"

using namespace gcd;
using namespace gcd::sim;

namespace {

WorkloadSpec hundred() {
  WorkloadSpec w;
  w.benchmark = "toy";
  w.heap_mb = 64;
  w.intrinsic = {{metrics::wall_time_ns, 100}, {metrics::cycles, 100}};
  w.seed = 1;
  return w;
}

std::uint64_t distilled(const InvocationRecord& r, const MetricId& m) {
  return distilled_cost(r, m, AttributionMode::stw_pauses).distilled;
}

}  // namespace

TEST(Simulate, OnePauseOnIntrinsicHundred) {
  GcSpec g;
  g.collector_id = "stw";
  g.pause_count = 1;
  g.pause_ns = Distribution::constant(5);
  auto [rec, truth] = simulate_run(hundred(), g);
  EXPECT_TRUE(validate_invocation(rec).empty());
  const auto& it = rec.measured();
  for (const auto& m : {metrics::wall_time_ns, metrics::cycles}) {
    EXPECT_EQ(total_cost(it, m), 105u) << m.name;
    EXPECT_EQ(explicit_cost(it, m, AttributionMode::stw_pauses), 5u);
    EXPECT_EQ(distilled(rec, m), 100u);
    EXPECT_EQ(truth.true_explicit.at(m), 5u);
    EXPECT_EQ(truth.true_implicit.at(m), 0u);
  }
}

TEST(Simulate, ImplicitTaxWithoutPauses) {
  GcSpec g;
  g.collector_id = "conc";
  g.implicit_tax = 0.10;
  auto [rec, truth] = simulate_run(hundred(), g);
  EXPECT_EQ(total_cost(rec.measured(), metrics::cycles), 110u);
  EXPECT_EQ(distilled(rec, metrics::cycles), 110u);
  EXPECT_EQ(truth.true_gc_cost().at(metrics::cycles), 10u);
}

TEST(Simulate, ThrottlingInflatesWallOnly) {
  GcSpec plain;
  plain.collector_id = "shen";
  GcSpec throttled = plain;
  throttled.throttling = Throttling{1, Distribution::constant(50)};
  auto a = simulate_run(hundred(), plain).first;
  auto b = simulate_run(hundred(), throttled).first;
  EXPECT_EQ(total_cost(b.measured(), metrics::wall_time_ns), total_cost(a.measured(), metrics::wall_time_ns) + 50);
  EXPECT_EQ(total_cost(b.measured(), metrics::cycles), total_cost(a.measured(), metrics::cycles));
}

TEST(Simulate, TotalsEqualIntrinsicPlusTrueGcCost) {
  WorkloadSpec w;
  w.intrinsic = {{metrics::wall_time_ns, 500'000'000}, {metrics::cycles, 1'700'000'000}, {metrics::instructions, 900'000'000}};
  w.iterations = 3;
  w.seed = 9;
  GcSpec g;
  g.collector_id = "mixed";
  g.pause_count = 25;
  g.pause_ns = Distribution::uniform(1e5, 4e6);
  g.pause_rate_scale = 3.5;
  g.implicit_tax = 0.37;
  g.throttling = Throttling{7, Distribution::lognormal(13, 0.5)};
  auto [rec, truth] = simulate_run(w, g, 4);
  EXPECT_TRUE(validate_invocation(rec).empty());
  for (const auto& [m, v] : w.intrinsic)
    EXPECT_EQ(total_cost(rec.measured(), m), v + truth.true_gc_cost().at(m)) << m.name;
}

TEST(Simulate, DeterministicUnderSeed) {
  auto s = scenario_from_json(default_scenario_json());
  const auto& gc = s.collectors[2];
  auto a = serialize_record(simulate_run(s.workload, gc, 1).first);
  auto b = serialize_record(simulate_run(s.workload, gc, 1).first);
  auto c = serialize_record(simulate_run(s.workload, gc, 2).first);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(parse_log(a).meta.at("jvm"), "simcheck");
}

TEST(Simulate, RequestsComeFromTheReplay) {
  auto s = scenario_from_json(default_scenario_json());
  auto rec = simulate_run(s.workload, s.collectors[0], 0).first;
  const auto& it = rec.measured();
  ASSERT_TRUE(it.requests);
  EXPECT_GT(it.requests->size(), 1000u);
  for (const auto& r : *it.requests) EXPECT_LE(r.issue_ns, r.start_ns);
  EXPECT_FALSE(rec.iterations[0].requests);
}

TEST(VerifyBound, TightWithZeroTaxMember) {
  auto w = hundred();
  w.intrinsic = {{metrics::wall_time_ns, 1'000'000}, {metrics::cycles, 3'000'000}};
  GcSpec stw{"stw", 10, Distribution::uniform(100, 2000), 2.0, 0.0, std::nullopt, {}, std::nullopt, std::nullopt};
  GcSpec conc{"conc", 40, Distribution::constant(30), 1.0, 0.4, Throttling{3, Distribution::constant(5000)}, {}, std::nullopt, std::nullopt};
  std::vector<InvocationRecord> recs;
  std::vector<GroundTruth> truths;
  for (int inv = 0; inv < 3; ++inv)
    for (const auto& g : {stw, conc}) {
      auto [r, t] = simulate_run(w, g, inv);
      recs.push_back(r);
      truths.push_back(t);
    }
  auto rep = verify_bound(recs, truths, {metrics::wall_time_ns, metrics::cycles});
  EXPECT_TRUE(rep.sound());
  for (const auto& c : rep.checks) {
    EXPECT_EQ(c.mdc, static_cast<double>(c.intrinsic));
    EXPECT_EQ(c.slack(), 0.0) << c.config.label() << " " << c.metric.name;
  }
}

TEST(VerifyBound, HighTaxPoolIsSoundButLoose) {
  auto w = hundred();
  w.intrinsic = {{metrics::wall_time_ns, 1'000'000}, {metrics::cycles, 3'000'000}};
  GcSpec a{"conc_a", 5, Distribution::constant(100), 1.0, 0.5, std::nullopt, {}, std::nullopt, std::nullopt};
  GcSpec b{"conc_b", 5, Distribution::constant(100), 1.0, 0.8, std::nullopt, {}, std::nullopt, std::nullopt};
  std::vector<InvocationRecord> recs;
  std::vector<GroundTruth> truths;
  for (const auto& g : {a, b}) {
    auto [r, t] = simulate_run(w, g);
    recs.push_back(r);
    truths.push_back(t);
  }
  auto rep = verify_bound(recs, truths, {metrics::cycles});
  EXPECT_TRUE(rep.sound());
  EXPECT_GT(rep.max_slack(), 0.0);
  for (const auto& c : rep.checks) EXPECT_GT(c.mdc, static_cast<double>(c.intrinsic));
}

TEST(VerifyBound, DetectsAnUnsoundPool) {
  auto w = hundred();
  GcSpec g;
  g.collector_id = "x";
  auto [r, t] = simulate_run(w, g);
  t.intrinsic.set(metrics::cycles, 1000);  // lie about the truth
  auto rep = verify_bound({r}, {t}, {metrics::cycles});
  EXPECT_FALSE(rep.sound());
  EXPECT_NE(rep.violations.front().find("below intrinsic"), std::string::npos);
}

TEST(GcThreads, TotalsAttributeExplicitPlusShare) {
  GcSpec g;
  g.collector_id = "threads";
  g.pause_count = 2;
  g.pause_ns = Distribution::constant(5);
  g.implicit_tax = 0.2;
  g.gc_thread_share = 0.5;
  auto [rec, truth] = simulate_run(hundred(), g);
  EXPECT_EQ(explicit_cost(rec.measured(), metrics::cycles, AttributionMode::gc_threads), 10u + 10u);
  auto rep = verify_bound({rec}, {truth}, {metrics::cycles}, AttributionMode::gc_threads);
  EXPECT_TRUE(rep.sound());
}

TEST(Scenario, RejectsBadInput) {
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"intrinsic":{"wall_time_ns":1},"collectors":[]})")), ConfigError);
  EXPECT_THROW(scenario_from_json(nlohmann::json::parse(R"({"collectors":[{"id":"a"}]})")), ConfigError);
  GcSpec g;
  g.implicit_tax = -1;
  EXPECT_THROW(simulate_run(hundred(), g), ConfigError);
}
