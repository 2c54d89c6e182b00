#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "negoforge/errors.hpp"
#include "negoforge/features.hpp"
#include "negoforge/json_io.hpp"
#include "negoforge/opponents.hpp"
#include "negoforge/problem_gen.hpp"
#include "support.hpp"

using namespace negoforge;
using negoforge::testing::two_issue_problem;

namespace {

SessionResult scripted_result(const std::vector<std::pair<Side, Outcome>>& offers,
                              std::optional<Outcome> agreement, const BargainingProblem& p) {
  SessionResult r;
  double t = 0.0;
  for (const auto& [side, o] : offers) {
    r.trace.push_back({side, Action::make_offer(o), t});
    t += 0.1;
  }
  if (agreement) {
    r.agreed = true;
    r.agreement = agreement;
    r.t_agree = t;
    r.utility = {utility(p.profile(Side::A), *agreement), utility(p.profile(Side::B), *agreement)};
  }
  return r;
}

UtilityEstimate table(std::map<Outcome, double> values) {
  return [values](const Outcome& o) { return values.at(o); };
}

}  // namespace

TEST(ProblemFeatures, HandComputedValues) {
  const auto p = two_issue_problem();
  const auto f = problem_features(p, Side::A);
  EXPECT_DOUBLE_EQ(f.n_issues, 2.0);
  EXPECT_DOUBLE_EQ(f.avg_values_per_issue, 2.5);
  EXPECT_DOUBLE_EQ(f.n_outcomes, 6.0);
  EXPECT_NEAR(f.std_issue_weights, 0.1, 1e-15);
  // Utilities 1, .6, .7, .3, .4, 0: mean .5, population variance .1.
  EXPECT_NEAR(f.mean_utility, 0.5, 1e-15);
  EXPECT_NEAR(f.std_utility, std::sqrt(0.1), 1e-15);
  const auto g = problem_features(p, Side::B);
  EXPECT_NEAR(g.std_issue_weights, 0.2, 1e-15);
  EXPECT_NEAR(g.mean_utility, (0 + .7 + .15 + .85 + .3 + 1) / 6.0, 1e-15);
}

TEST(ProblemFeatures, MatchEnumerationOnGeneratedProblems) {
  ProblemGenSpec spec;
  spec.enumeration_cap = 10'000;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto p = generate_problem(spec, seed);
    const auto f = problem_features(p, Side::B);
    std::vector<double> u;
    for (std::uint64_t k = 0; k < outcome_count(p); ++k) u.push_back(utility(p.profile(Side::B), outcome_at(p, k)));
    double mean = 0.0;
    for (double x : u) mean += x;
    mean /= static_cast<double>(u.size());
    double var = 0.0;
    for (double x : u) var += (x - mean) * (x - mean);
    EXPECT_NEAR(f.mean_utility, mean, 1e-9);
    EXPECT_NEAR(f.std_utility, std::sqrt(var / static_cast<double>(u.size())), 1e-9);
    EXPECT_DOUBLE_EQ(f.n_outcomes, static_cast<double>(u.size()));
  }
}

TEST(ProblemFeatures, RespectsEnumerationCap) {
  EXPECT_THROW(problem_features(two_issue_problem(), Side::A, 3), EnumerationCapError);
}

TEST(OpponentObservation, ClampedConcessionBranch) {
  const auto p = two_issue_problem();
  // Opponent (B) offers with u_o .9, .7, .5; u_o at our best outcome {0,0} is .6.
  const auto r = scripted_result({{Side::B, {2, 1}}, {Side::A, {0, 0}}, {Side::B, {1, 1}},
                                  {Side::A, {0, 0}}, {Side::B, {0, 1}}},
                                 Outcome{0, 1}, p);
  const auto uo = table({{{2, 1}, 0.9}, {{1, 1}, 0.7}, {{0, 1}, 0.5}, {{0, 0}, 0.6}});
  const auto obs = opponent_observation(r, p, Side::A, uo);
  ASSERT_TRUE(obs);
  EXPECT_DOUBLE_EQ(obs->t_agree, 0.5);
  EXPECT_DOUBLE_EQ(obs->concession_rate, 1.0);                       // .5 <= .6
  EXPECT_NEAR(obs->avg_offer_rate, (1.0 - 0.7) / (1.0 - 0.6), 1e-15);  // mean .7
  EXPECT_NEAR(obs->default_strategy_performance, 0.6, 1e-15);         // u = .6, worst 0
}

TEST(OpponentObservation, LinearConcessionBranchAndFailure) {
  const auto p = two_issue_problem();
  const auto r = scripted_result({{Side::B, {2, 1}}, {Side::A, {0, 0}}, {Side::B, {2, 1}}, {Side::A, {1, 0}}},
                                 std::nullopt, p);
  // Our side is B: best outcome {2,1}, opponent u_o there is .2.
  const auto uo = table({{{0, 0}, 1.0}, {{1, 0}, 0.8}, {{2, 1}, 0.2}});
  const auto obs = opponent_observation(r, p, Side::B, uo);
  ASSERT_TRUE(obs);
  EXPECT_DOUBLE_EQ(obs->t_agree, 1.0);
  EXPECT_NEAR(obs->concession_rate, (1.0 - 0.8) / (1.0 - 0.2), 1e-15);
  EXPECT_NEAR(obs->avg_offer_rate, (1.0 - 0.9) / (1.0 - 0.2), 1e-15);
  EXPECT_DOUBLE_EQ(obs->default_strategy_performance, 0.0);
}

TEST(OpponentObservation, AgreementAtWorstScoresZero) {
  const auto p = two_issue_problem();
  const auto r = scripted_result({{Side::B, {2, 1}}}, Outcome{2, 1}, p);
  const auto obs = opponent_observation(r, p, Side::A, table({{{2, 1}, 1.0}, {{0, 0}, 0.0}}));
  ASSERT_TRUE(obs);
  EXPECT_DOUBLE_EQ(obs->default_strategy_performance, 0.0);
  EXPECT_DOUBLE_EQ(obs->concession_rate, 0.0);
}

TEST(OpponentObservation, NoOpponentOfferIsUnusable) {
  const auto p = two_issue_problem();
  const auto r = scripted_result({{Side::A, {0, 0}}}, std::nullopt, p);
  EXPECT_FALSE(opponent_observation(r, p, Side::A, table({{{0, 0}, 0.0}})));
}

TEST(OpponentObservation, EstimatedUtilityUsesOpponentOffersOnly) {
  const auto p = two_issue_problem();
  const auto r = scripted_result({{Side::A, {0, 0}}, {Side::B, {2, 1}}, {Side::A, {0, 0}}, {Side::B, {2, 1}}},
                                 std::nullopt, p);
  const auto est = estimated_opponent_utility(r, p, Side::A);
  EXPECT_DOUBLE_EQ(est({2, 1}), 1.0);
  EXPECT_DOUBLE_EQ(est({0, 0}), 0.0);
}

TEST(Aggregate, MeanAndCoefficientOfVariation) {
  const std::vector<OpponentObservation> obs{{0.2, 0.5, 0.0, 1.0}, {0.6, 0.5, 0.0, 0.0}};
  const auto f = aggregate(obs);
  EXPECT_DOUBLE_EQ(f.mean[0], 0.4);
  EXPECT_NEAR(f.cov[0], 0.2 / 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(f.cov[1], 0.0);
  EXPECT_DOUBLE_EQ(f.mean[2], 0.0);
  EXPECT_DOUBLE_EQ(f.cov[2], 0.0);
  EXPECT_DOUBLE_EQ(f.cov[3], 1.0);
  EXPECT_THROW(aggregate({obs.front()}), InsufficientSamplesError);
}

TEST(SettingFeatures, MissingOpponentBlockIsNaN) {
  const auto pf = problem_features(two_issue_problem(), Side::A);
  const auto s = SettingFeatures::make(pf, std::nullopt);
  EXPECT_FALSE(s.opponent_known);
  EXPECT_DOUBLE_EQ(s.values[0], 2.0);
  for (std::size_t k = kNumProblemFeatures; k < kNumSettingFeatures; ++k) EXPECT_TRUE(std::isnan(s.values[k]));
  OpponentFeatures of;
  of.mean = {1, 2, 3, 4};
  of.cov = {5, 6, 7, 8};
  const auto full = SettingFeatures::make(pf, of);
  EXPECT_TRUE(full.opponent_known);
  EXPECT_EQ(feature_names().size(), 14u);
  for (std::size_t k = kNumProblemFeatures; k < kNumSettingFeatures; ++k) EXPECT_FALSE(std::isnan(full.values[k]));
}

TEST(FeatureStore, RoundTripIsByteIdentical) {
  const auto dir = negoforge::testing::scratch_dir("feature-store");
  FeatureStore store{{"x", {{0.1, 0.2, 0.3, 0.4}, {1.0, 0.0, 0.5, 0.25}}}, {"y", {{0.5, 0.5, 0.5, 0.5}}}};
  write_feature_store(dir / "a.json", store, 3);
  const auto back = read_feature_store(dir / "a.json");
  EXPECT_EQ(back, store);
  write_feature_store(dir / "b.json", back, 3);
  EXPECT_EQ(read_text_file(dir / "a.json"), read_text_file(dir / "b.json"));
}

TEST(FeatureCsv, HeaderAndRowCount) {
  const auto pf = problem_features(two_issue_problem(), Side::A);
  const std::string csv = feature_csv({"s1", "s2"}, {SettingFeatures::make(pf, std::nullopt),
                                                     SettingFeatures::make(pf, std::nullopt)});
  EXPECT_EQ(csv.substr(0, csv.find('\n')).rfind("setting_id,", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}
