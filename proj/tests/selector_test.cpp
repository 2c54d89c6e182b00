#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "negoforge/errors.hpp"
#include "negoforge/json_io.hpp"
#include "negoforge/selector.hpp"
#include "support.hpp"

using namespace negoforge;

namespace {

struct Synthetic {
  PerformanceMatrix matrix{{}};
  std::vector<SettingFeatures> features;
};

// Three strategies; feature 0 in thirds decides which one is best (0.9 vs 0.4).
// Strategy 0 is best on the largest share, so it is also the single best.
Synthetic separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> ids;
  for (std::size_t s = 0; s < n; ++s) ids.push_back("s" + std::to_string(s));
  Synthetic out;
  out.matrix = PerformanceMatrix(ids);
  for (std::size_t t = 0; t < 3; ++t) out.matrix.add_strategy("theta" + std::to_string(t + 1));
  for (std::size_t s = 0; s < n; ++s) {
    SettingFeatures f;
    f.opponent_known = true;
    for (double& v : f.values) v = uniform01(rng);
    const double x = f.values[0];
    const std::size_t best = x < 0.5 ? 0 : (x < 0.75 ? 1 : 2);
    for (std::size_t t = 0; t < 3; ++t) {
      out.matrix.set_cell(t, s, (t == best ? 0.9 : 0.4) + 0.01 * uniform01(rng), 1);
    }
    out.features.push_back(f);
  }
  return out;
}

SelectorSearchSpec quick_spec() {
  SelectorSearchSpec spec;
  spec.forest.trees = 20;
  spec.candidates = {{SelectorMethod::NearestNeighbor, 3},
                     {SelectorMethod::ForestClassifier, 20},
                     {SelectorMethod::ForestRegression, 20}};
  return spec;
}

}  // namespace

TEST(Baselines, OracleAndSingleBestByHand) {
  PerformanceMatrix m({"a", "b", "c"});
  m.add_strategy("theta1");
  m.add_strategy("theta2");
  const double v[2][3] = {{0.6, 0.5, 0.7}, {0.4, 0.9, 0.7}};
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t s = 0; s < 3; ++s) m.set_cell(t, s, v[t][s], 1);
  }
  EXPECT_EQ(oracle(m, 0), 0u);
  EXPECT_EQ(oracle(m, 1), 1u);
  EXPECT_EQ(oracle(m, 2), 0u);  // tie -> lowest index
  EXPECT_EQ(single_best(m), 1u);  // .6667 vs .6
  EXPECT_NEAR(oracle_performance(m), (0.6 + 0.9 + 0.7) / 3.0, 1e-15);
}

TEST(NormalizedScore, Endpoints) {
  EXPECT_EQ(normalized_score(0.8, 0.6, 0.8), 1.0);
  EXPECT_EQ(normalized_score(0.6, 0.6, 0.8), 0.0);
  EXPECT_EQ(normalized_score(0.7, 0.7, 0.7), 1.0);
  EXPECT_NEAR(normalized_score(0.7, 0.6, 0.8), 0.5, 1e-12);
}

TEST(NormalizedScore, ModelFormEndpoints) {
  auto d = separable(30, 1);
  // Constant θ₁ selector scores 0 unless θ₁ is also the oracle everywhere.
  const auto sb = single_best(d.matrix);
  EXPECT_EQ(normalized_score(SelectorModel::constant(3, sb), d.matrix, d.features), 0.0);
}

TEST(FitSelector, SeparableHeldOutScore) {
  const auto train = separable(120, 2);
  const auto test = separable(60, 3);
  const auto model = fit_selector(train.matrix, train.features, quick_spec(), 5);
  EXPECT_NE(model.method(), SelectorMethod::Constant);
  EXPECT_GE(normalized_score(model, test.matrix, test.features), 0.95);
}

TEST(FitSelector, TrainingGuarantee) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    std::vector<std::string> ids;
    std::vector<SettingFeatures> features(25);
    for (std::size_t s = 0; s < 25; ++s) {
      ids.push_back("s" + std::to_string(s));
      features[s].opponent_known = true;
      for (double& v : features[s].values) v = uniform01(rng);
    }
    PerformanceMatrix m(ids);
    for (std::size_t t = 0; t < 3; ++t) {
      m.add_strategy("theta" + std::to_string(t + 1));
      for (std::size_t s = 0; s < 25; ++s) m.set_cell(t, s, uniform01(rng), 1);
    }
    const auto model = fit_selector(m, features, quick_spec(), seed);
    const double as = selector_performance(model, m, features);
    EXPECT_GE(oracle_performance(m), as);
    EXPECT_GE(as, m.row_mean(0));
  }
}

TEST(FitSelector, SingleStrategyIsConstant) {
  PerformanceMatrix m({"a", "b"});
  m.add_strategy("theta1");
  m.set_cell(0, 0, 0.5, 1);
  m.set_cell(0, 1, 0.5, 1);
  std::vector<SettingFeatures> f(2);
  for (auto& x : f) x.opponent_known = true;
  const auto model = fit_selector(m, f, quick_spec(), 1);
  EXPECT_EQ(model.method(), SelectorMethod::Constant);
  EXPECT_EQ(model.select(f[0]), 0u);
}

TEST(FitSelector, RejectsMissingFeaturesAndIncompleteMatrix) {
  auto d = separable(10, 4);
  d.features[3].opponent_known = false;
  try {
    fit_selector(d.matrix, d.features, quick_spec(), 1);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("s3"), std::string::npos) << e.what();
  }
  PerformanceMatrix m({"a", "b"});
  m.add_strategy("theta1");
  m.add_strategy("theta2");
  m.set_cell(0, 0, 0.5, 1);
  EXPECT_THROW(fit_selector(m, d.features, quick_spec(), 1), IncompleteMatrixError);
}

TEST(SelectorModel, MissingOpponentFeaturesFallBack) {
  const auto d = separable(90, 6);
  const auto model = fit_selector(d.matrix, d.features, quick_spec(), 2);
  SettingFeatures unknown = d.features[0];
  unknown.opponent_known = false;
  EXPECT_EQ(model.select(unknown), model.fallback());
  SettingFeatures nan = d.features[0];
  nan.values[9] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(model.select(nan), model.fallback());
  EXPECT_EQ(model.fallback(), 0u);
  const std::vector<double> short_row(5, 0.0);
  EXPECT_THROW(model.select(std::span<const double>(short_row)), ConfigError);
}

TEST(SelectorModel, EveryMethodRoundTrips) {
  const auto d = separable(60, 7);
  std::vector<std::size_t> all(60);
  for (std::size_t s = 0; s < 60; ++s) all[s] = s;
  const auto dir = negoforge::testing::scratch_dir("selector");
  for (const auto& c : quick_spec().candidates) {
    const auto model = SelectorModel::train(c, d.matrix, d.features, all, 0, ForestOptions{}, 3);
    write_selector(dir / "a.json", model, 1);
    const auto back = read_selector(dir / "a.json");
    for (const auto& f : d.features) ASSERT_EQ(back.select(f), model.select(f)) << to_string(c.method);
    write_selector(dir / "b.json", back, 1);
    EXPECT_EQ(read_text_file(dir / "a.json"), read_text_file(dir / "b.json")) << to_string(c.method);
    EXPECT_EQ(selector_method_from_string(to_string(c.method)), c.method);
  }
}

TEST(SelectorModel, NearestNeighbourPicksTheNeighboursBest) {
  PerformanceMatrix m({"a", "b"});
  m.add_strategy("theta1");
  m.add_strategy("theta2");
  m.set_cell(0, 0, 0.9, 1);
  m.set_cell(1, 0, 0.1, 1);
  m.set_cell(0, 1, 0.2, 1);
  m.set_cell(1, 1, 0.8, 1);
  std::vector<SettingFeatures> f(2);
  for (std::size_t s = 0; s < 2; ++s) {
    f[s].opponent_known = true;
    f[s].values.fill(static_cast<double>(s));
  }
  const auto model = SelectorModel::train({SelectorMethod::NearestNeighbor, 1}, m, f, {0, 1}, 0, ForestOptions{}, 1);
  SettingFeatures q;
  q.opponent_known = true;
  q.values.fill(0.9);
  EXPECT_EQ(model.select(q), 1u);
  q.values.fill(0.1);
  EXPECT_EQ(model.select(q), 0u);
}
