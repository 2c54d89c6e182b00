#include <gtest/gtest.h>

#include <cmath>

#include "negoforge/dynamic_agent.hpp"
#include "negoforge/errors.hpp"
#include "negoforge/opponents.hpp"
#include "negoforge/problem_gen.hpp"
#include "support.hpp"

using namespace negoforge;
using negoforge::testing::ScriptedAgent;
using negoforge::testing::two_issue_problem;

TEST(TargetUtility, ConcedesFromOneToZero) {
  EXPECT_DOUBLE_EQ(target_utility(0.0, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(target_utility(1.0, 0.1), 0.0);
  EXPECT_DOUBLE_EQ(target_utility(0.5, 1.0), 0.5);
  EXPECT_NEAR(target_utility(0.25, 0.5), 1.0 - 0.0625, 1e-15);
  // Boulware (small e) stays high longer than a conceder.
  EXPECT_GT(target_utility(0.5, 0.1), target_utility(0.5, 2.0));
}

TEST(WindowThreshold, UsesTrailingWindowOnly) {
  AcceptanceState s;
  s.t = 0.75;  // window [0.5, 0.75]
  s.history = {{0.1, 0.95}, {0.49, 0.9}, {0.5, 0.4}, {0.6, 0.6}, {0.75, 0.5}};
  EXPECT_DOUBLE_EQ(*window_threshold(s, LowerBoundary::MaxW), 0.6);
  EXPECT_DOUBLE_EQ(*window_threshold(s, LowerBoundary::AvgW), 0.5);
  s.history = {{0.1, 0.95}};
  EXPECT_FALSE(window_threshold(s, LowerBoundary::AvgW));
}

TEST(ShouldAccept, GapRuleAndLateWindowRule) {
  AgentConfiguration c;
  c.alpha = 1.05;
  c.beta = 0.02;
  c.t_acc = 0.9;
  c.gamma = LowerBoundary::MaxW;
  AcceptanceState s;
  s.t = 0.5;
  s.next_own_utility = 0.8;
  EXPECT_TRUE(should_accept(s, c, 0.75));    // 1.05 * 0.75 + 0.02 = 0.8075
  EXPECT_FALSE(should_accept(s, c, 0.74));   // 0.797
  s.t = 0.95;
  s.history = {{0.92, 0.5}, {0.93, 0.6}};
  EXPECT_TRUE(should_accept(s, c, 0.6));
  EXPECT_FALSE(should_accept(s, c, 0.59));
  c.gamma = LowerBoundary::AvgW;
  EXPECT_TRUE(should_accept(s, c, 0.55));
  s.history.clear();
  EXPECT_FALSE(should_accept(s, c, 0.55));
}

TEST(BidFitness, BlendsTargetFitAndOpponentEstimate) {
  EXPECT_DOUBLE_EQ(bid_fitness(0.8, 0.3, 0.8, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(bid_fitness(0.8, 0.3, 0.8, 0.0), 0.3);
  EXPECT_DOUBLE_EQ(bid_fitness(0.6, 0.5, 0.8, 0.5), 0.5 * 0.8 + 0.5 * 0.5);
}

TEST(FrequencyModel, UninformedEstimatesOne) {
  const FrequencyOpponentModel m(two_issue_problem());
  EXPECT_DOUBLE_EQ(m.estimate({0, 0}), 1.0);
  EXPECT_EQ(m.observations(), 0u);
}

TEST(FrequencyModel, EntropyWeightsAndCountScores) {
  FrequencyOpponentModel m(two_issue_problem());
  m.update({2, 1});
  m.update({2, 1});
  m.update({1, 1});
  const double h0 = -(1.0 / 3 * std::log(1.0 / 3) + 2.0 / 3 * std::log(2.0 / 3));
  const double raw0 = 1.0 - h0 / std::log(3.0);
  const double raw1 = 1.0;
  const double w0 = raw0 / (raw0 + raw1), w1 = raw1 / (raw0 + raw1);
  EXPECT_NEAR(m.issue_weights()[0], w0, 1e-15);
  EXPECT_NEAR(m.issue_weights()[1], w1, 1e-15);
  EXPECT_NEAR(m.estimate({2, 1}), 1.0, 1e-15);
  EXPECT_NEAR(m.estimate({1, 0}), w0 * 0.5, 1e-15);
  EXPECT_NEAR(m.estimate({0, 1}), w1, 1e-15);
  EXPECT_THROW(m.update({3, 0}), InvalidOutcomeError);
}

TEST(GaSearch, SortedPopulationAndElitistProgress) {
  const auto p = generate_problem(ProblemGenSpec{}, 17);
  AgentConfiguration c;
  c.pop_size = 60;
  c.evolutions = 5;
  c.elitism_rate = 0.1;
  FrequencyOpponentModel model(p);
  Rng rng(3);
  const auto r = ga_search(p, Side::A, c, model, 0.7, rng);
  ASSERT_EQ(r.population.size(), 60u);
  ASSERT_EQ(r.best_fitness_per_generation.size(), 6u);
  for (std::size_t k = 1; k < r.fitness.size(); ++k) EXPECT_GE(r.fitness[k - 1], r.fitness[k]);
  for (std::size_t g = 1; g < r.best_fitness_per_generation.size(); ++g) {
    EXPECT_GE(r.best_fitness_per_generation[g], r.best_fitness_per_generation[g - 1]);
  }
  for (std::size_t k = 0; k < r.population.size(); ++k) {
    EXPECT_TRUE(is_valid_outcome(p, r.population[k]));
    EXPECT_DOUBLE_EQ(r.fitness[k], bid_fitness(utility(p.profile(Side::A), r.population[k]),
                                               model.estimate(r.population[k]), 0.7, c.delta));
  }
}

TEST(ChooseBid, NthDistinctQualifyingCandidate) {
  const auto p = two_issue_problem();
  const auto& own = p.profile(Side::A);
  GaResult g;
  g.population = {{0, 1}, {0, 1}, {2, 1}, {1, 0}, {0, 0}};
  AgentConfiguration c;
  c.n = 2;
  // Qualifying at target 0.65 (floor 0.6): {0,1} 0.6, {1,0} 0.7, {0,0} 1.0.
  EXPECT_EQ(choose_bid(g, own, c, 0.65), (Outcome{1, 0}));
  c.n = 5;
  EXPECT_EQ(choose_bid(g, own, c, 0.65), (Outcome{0, 0}));
  c.n = 1;
  EXPECT_EQ(choose_bid(g, own, c, 2.0), best_outcome(own));
}

TEST(DynamicAgent, AcceptsGenerousOfferImmediately) {
  const auto p = two_issue_problem();
  DynamicAgent db(AgentConfiguration{});
  ScriptedAgent gift({Action::make_offer({0, 0})});
  const auto r2 = run_session(db, gift, p, 20, 4, Side::B);
  ASSERT_TRUE(r2.agreed);
  EXPECT_EQ(*r2.agreement, (Outcome{0, 0}));
  EXPECT_DOUBLE_EQ(r2.t_agree, 0.05);
}

TEST(DynamicAgent, OffersAreValidAgainstEveryRosterOpponent) {
  const auto p = generate_problem(ProblemGenSpec{}, 23);
  for (const auto& o : default_roster()) {
    DynamicAgent da(AgentConfiguration{});
    auto opp = instantiate(o, 5);
    const auto r = run_session(da, *opp, p, 60, 5);
    EXPECT_FALSE(r.violation) << o.id;
    EXPECT_GE(r.utility_of(Side::A), 0.0);
    EXPECT_LE(r.utility_of(Side::A), 1.0);
  }
}
