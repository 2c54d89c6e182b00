#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <numbers>

#include "negoforge/errors.hpp"
#include "negoforge/json_io.hpp"
#include "negoforge/smbo.hpp"
#include "support.hpp"

using namespace negoforge;

namespace {

struct Fixture {
  std::vector<std::string> ids;
  FeatureMatrix features;
};

Fixture settings(std::size_t n, std::uint64_t seed = 1) {
  Fixture f;
  Rng rng(seed);
  for (std::size_t s = 0; s < n; ++s) {
    f.ids.push_back("s" + std::to_string(s));
    const double row[2] = {uniform01(rng), uniform01(rng)};
    f.features.append_row(row);
  }
  return f;
}

// Peak at delta = 0.7 with per-run noise.
double quadratic(const AgentConfiguration& c, std::size_t setting, std::uint64_t seed) {
  const double noise = (static_cast<double>(mix64(seed ^ setting) >> 11) * 0x1.0p-53 - 0.5) * 0.02;
  return 1.0 - (c.delta - 0.7) * (c.delta - 0.7) + noise;
}

double reference_ei(double m, double v, double best) {
  const double s = std::sqrt(v);
  if (s == 0.0) return std::max(m - best, 0.0);
  const double z = (m - best) / s;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  return (m - best) * cdf + s * pdf;
}

SmboOptions quick(std::size_t budget) {
  SmboOptions o;
  o.budget = budget;
  o.forest.trees = 10;
  o.random_candidates = 50;
  return o;
}

}  // namespace

TEST(ExpectedImprovement, MatchesClosedForm) {
  for (double m : {0.2, 0.5, 0.8}) {
    for (double v : {0.0, 0.001, 0.04}) {
      EXPECT_NEAR(expected_improvement(m, v, 0.5), reference_ei(m, v, 0.5), 1e-12);
      EXPECT_GE(expected_improvement(m, v, 0.5), 0.0);
    }
  }
  EXPECT_GT(expected_improvement(0.4, 0.04, 0.5), expected_improvement(0.4, 0.01, 0.5));
  EXPECT_GT(expected_improvement(0.6, 0.01, 0.5), expected_improvement(0.4, 0.01, 0.5));
}

TEST(RunHistory, CellAndSetMeans) {
  RunHistory h({"a", "b", "c"});
  const auto id = h.intern(AgentConfiguration{});
  EXPECT_EQ(h.intern(AgentConfiguration{}), id);
  h.add(id, 0, 1.0, 1);
  h.add(id, 0, 0.0, 2);
  h.add(id, 2, 0.9, 3);
  EXPECT_DOUBLE_EQ(h.cell_mean(id, 0), 0.5);
  EXPECT_EQ(h.settings_of(id), (std::vector<std::size_t>{0, 2}));
  EXPECT_DOUBLE_EQ(h.mean(id), 0.7);  // average of per-setting means
  EXPECT_EQ(h.runs(id, 0), 2u);
  EXPECT_EQ(h.total_runs(id), 3u);
}

TEST(RunHistory, JsonlRoundTripIsByteIdentical) {
  const auto dir = negoforge::testing::scratch_dir("history");
  const auto f = settings(5);
  const auto r = smbo(ConfigurationSpace(), f.ids, f.features, quadratic, quick(40), 3);
  write_run_history(dir / "a.jsonl", r.history, 3);
  const auto back = read_run_history(dir / "a.jsonl");
  EXPECT_EQ(back.size(), r.history.size());
  write_run_history(dir / "b.jsonl", back, 3);
  EXPECT_EQ(read_text_file(dir / "a.jsonl"), read_text_file(dir / "b.jsonl"));
}

TEST(RunHistory, RejectsInconsistentRecords) {
  const auto dir = negoforge::testing::scratch_dir("history-bad");
  const auto f = settings(3);
  const auto r = smbo(ConfigurationSpace(), f.ids, f.features, quadratic, quick(10), 1);
  std::string text = run_history_jsonl(r.history, 1);
  const auto pos = text.find("\"ordinal\":1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 11, "\"ordinal\":9");
  write_text_file(dir / "bad.jsonl", text);
  EXPECT_THROW(read_run_history(dir / "bad.jsonl"), SchemaError);
}

TEST(Smbo, DegenerateBudgets) {
  const auto f = settings(4);
  EXPECT_THROW(smbo(ConfigurationSpace(), f.ids, f.features, quadratic, quick(0), 1), ConfigError);
  const auto r = smbo(ConfigurationSpace(), f.ids, f.features, quadratic, quick(1), 1);
  EXPECT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.incumbent, ConfigurationSpace().default_configuration());
}

TEST(Smbo, NeverExceedsBudget) {
  const auto f = settings(6);
  for (std::size_t budget : {5u, 23u, 60u}) {
    const auto r = smbo(ConfigurationSpace(), f.ids, f.features, quadratic, quick(budget), budget);
    EXPECT_LE(r.history.size(), budget);
    EXPECT_GE(r.history.size(), budget - 1);
  }
}

TEST(Smbo, DeterministicAcrossWorkers) {
  const auto f = settings(6);
  auto serial = quick(60);
  auto parallel = quick(60);
  parallel.workers = 3;
  const auto a = smbo(ConfigurationSpace(), f.ids, f.features, quadratic, serial, 11);
  const auto b = smbo(ConfigurationSpace(), f.ids, f.features, quadratic, parallel, 11);
  EXPECT_EQ(run_history_jsonl(a.history, 0), run_history_jsonl(b.history, 0));
  EXPECT_EQ(a.incumbent, b.incumbent);
}

TEST(Smbo, ResumeCountsEarlierSessions) {
  const auto f = settings(6);
  const auto first = smbo(ConfigurationSpace(), f.ids, f.features, quadratic, quick(30), 4);
  const auto resumed = smbo(ConfigurationSpace(), f.ids, f.features, quadratic, quick(60), 4, first.history);
  EXPECT_LE(resumed.history.size(), 60u);
  EXPECT_GT(resumed.history.size(), first.history.size());
  for (std::size_t k = 0; k < first.history.size(); ++k) {
    EXPECT_EQ(resumed.history.records()[k].r, first.history.records()[k].r);
  }
}

TEST(Smbo, RecoversQuadraticOptimum) {
  const auto f = settings(20, 5);
  for (std::uint64_t seed : {1u, 2u}) {
    SmboOptions o;
    o.budget = 400;
    const auto r = smbo(ConfigurationSpace(), f.ids, f.features, quadratic, o, seed);
    EXPECT_NEAR(r.incumbent.delta, 0.7, 0.1) << "seed " << seed;
    ASSERT_FALSE(r.trajectory.empty());
    EXPECT_EQ(r.trajectory.back().config_id, r.incumbent_id);
  }
}

TEST(Intensify, TieKeepsIncumbent) {
  const auto f = settings(5);
  RunHistory h(f.ids);
  std::size_t inc = h.intern(AgentConfiguration{});
  const auto original = inc;
  ConfigurationSpace space;
  Rng rng(1);
  std::vector<AgentConfiguration> challengers;
  for (int k = 0; k < 4; ++k) challengers.push_back(space.sample(rng));
  const Metric flat = [](const AgentConfiguration&, std::size_t, std::uint64_t) { return 0.5; };
  const auto stats = intensify(challengers, inc, h, flat, 1000, 1000, 1000, 1, rng, 9);
  EXPECT_EQ(stats.promotions, 0u);
  EXPECT_EQ(inc, original);
  EXPECT_EQ(stats.sessions, h.size());
}

TEST(Intensify, StrictlyBetterChallengerIsPromotedAfterFullCoverage) {
  const auto f = settings(5);
  RunHistory h(f.ids);
  std::size_t inc = h.intern(AgentConfiguration{});
  for (std::size_t s = 0; s < 5; ++s) h.add(inc, s, 0.9, s);
  AgentConfiguration better;
  better.delta = 1.0;
  const Metric by_delta = [](const AgentConfiguration& c, std::size_t, std::uint64_t) { return c.delta; };
  Rng rng(2);
  const auto stats = intensify({better}, inc, h, by_delta, 1000, 1000, 1000, 1, rng, 3);
  EXPECT_EQ(stats.promotions, 1u);
  EXPECT_EQ(h.config(inc), better);
  EXPECT_EQ(h.settings_of(inc).size(), 5u);
}

TEST(Intensify, WorseChallengerIsRejectedEarly) {
  const auto f = settings(8);
  RunHistory h(f.ids);
  std::size_t inc = h.intern(AgentConfiguration{});
  for (std::size_t s = 0; s < 8; ++s) h.add(inc, s, 0.9, s);
  AgentConfiguration worse;
  worse.delta = 0.1;
  const Metric by_delta = [](const AgentConfiguration& c, std::size_t, std::uint64_t) { return c.delta; };
  Rng rng(2);
  intensify({worse}, inc, h, by_delta, 1000, 1000, 1000, 1, rng, 3);
  const auto id = h.find(worse);
  ASSERT_TRUE(id);
  EXPECT_EQ(h.total_runs(*id), 1u);
}

TEST(Intensify, IncumbentRunsStayBalanced) {
  const auto f = settings(7);
  RunHistory h(f.ids);
  std::size_t inc = h.intern(AgentConfiguration{});
  ConfigurationSpace space;
  Rng rng(3);
  std::vector<AgentConfiguration> challengers;
  for (int k = 0; k < 20; ++k) challengers.push_back(space.sample(rng));
  const Metric flat = [](const AgentConfiguration&, std::size_t, std::uint64_t) { return 0.5; };
  intensify(challengers, inc, h, flat, 100000, 100000, 100000, 1, rng, 1);
  std::size_t lo = SIZE_MAX, hi = 0;
  for (std::size_t s = 0; s < 7; ++s) {
    lo = std::min(lo, h.runs(inc, s));
    hi = std::max(hi, h.runs(inc, s));
  }
  EXPECT_LE(hi - lo, 1u);
  EXPECT_GE(lo, 2u);
}

TEST(SelectConfigurations, UnfittedModelSamplesRandomly) {
  const auto f = settings(4);
  ConfigurationSpace space;
  Surrogate model(space, f.features);
  Rng rng(1);
  const auto cs = select_configurations(model, space.default_configuration(), space, 6, quick(10), rng);
  EXPECT_EQ(cs.size(), 6u);
  for (const auto& c : cs) EXPECT_TRUE(check_domains(c).empty());
}

TEST(SelectConfigurations, ExpectedImprovementCandidatesBeatRandomOnes) {
  const auto f = settings(6);
  ConfigurationSpace space;
  const auto run = smbo(space, f.ids, f.features, quadratic, quick(80), 2);
  Surrogate model(space, f.features);
  model.fit(run.history, ForestOptions{}, 5);
  ASSERT_TRUE(model.fitted());
  const double best = run.history.mean(run.incumbent_id);
  Rng rng(8);
  const auto cs = select_configurations(model, run.incumbent, space, 10, quick(80), rng);
  ASSERT_EQ(cs.size(), 10u);
  double ei_sum = 0.0, random_sum = 0.0;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    (k % 2 == 0 ? ei_sum : random_sum) += model.expected_improvement(cs[k], best);
  }
  EXPECT_GE(ei_sum, random_sum);
}
