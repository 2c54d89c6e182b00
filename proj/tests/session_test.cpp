#include <gtest/gtest.h>

#include <sstream>

#include "negoforge/dynamic_agent.hpp"
#include "negoforge/errors.hpp"
#include "negoforge/opponents.hpp"
#include "negoforge/problem_gen.hpp"
#include "support.hpp"

using namespace negoforge;
using negoforge::testing::ScriptedAgent;
using negoforge::testing::two_issue_problem;

TEST(Session, AcceptanceClosesTheDealAtTheStandingOffer) {
  const auto p = two_issue_problem();
  ScriptedAgent a({Action::make_offer({0, 1})});
  ScriptedAgent b({Action::accept()});
  const auto r = run_session(a, b, p, 10, 1);
  ASSERT_TRUE(r.agreed);
  EXPECT_EQ(*r.agreement, (Outcome{0, 1}));
  EXPECT_DOUBLE_EQ(r.t_agree, 0.1);
  EXPECT_DOUBLE_EQ(r.utility_of(Side::A), 0.6);
  EXPECT_DOUBLE_EQ(r.utility_of(Side::B), 0.7);
  EXPECT_EQ(r.trace.size(), 2u);
  EXPECT_FALSE(r.violation);
}

TEST(Session, AcceptsTheMostRecentOffer) {
  const auto p = two_issue_problem();
  ScriptedAgent a({Action::make_offer({0, 0}), Action::accept()});
  ScriptedAgent b({Action::make_offer({2, 1})});
  const auto r = run_session(a, b, p, 10, 1);
  ASSERT_TRUE(r.agreed);
  EXPECT_EQ(*r.agreement, (Outcome{2, 1}));
  EXPECT_DOUBLE_EQ(r.t_agree, 0.2);
  EXPECT_EQ(b.received().size(), 1u);
  EXPECT_EQ(a.received().front(), Action::make_offer({2, 1}));
}

TEST(Session, DeadlineAbortYieldsZeroUtilities) {
  const auto p = two_issue_problem();
  ScriptedAgent a({Action::make_offer({0, 0})});
  ScriptedAgent b({Action::make_offer({2, 1})});
  const auto r = run_session(a, b, p, 7, 3, Side::B);
  EXPECT_FALSE(r.agreed);
  EXPECT_FALSE(r.violation);
  EXPECT_EQ(r.trace.size(), 7u);
  EXPECT_DOUBLE_EQ(r.t_agree, 1.0);
  EXPECT_DOUBLE_EQ(r.utility_of(Side::A), 0.0);
  EXPECT_DOUBLE_EQ(r.utility_of(Side::B), 0.0);
  EXPECT_EQ(r.trace.front().actor, Side::B);
  EXPECT_LT(r.trace.back().t, 1.0);
}

TEST(Session, WalkingAwayFails) {
  const auto p = two_issue_problem();
  ScriptedAgent a({Action::make_offer({0, 0})});
  ScriptedAgent b({Action::end()});
  const auto r = run_session(a, b, p, 10, 1);
  EXPECT_FALSE(r.agreed);
  EXPECT_FALSE(r.violation);
  EXPECT_DOUBLE_EQ(r.utility_of(Side::A), 0.0);
}

TEST(Session, ViolationsAreAttributed) {
  const auto p = two_issue_problem();
  {
    ScriptedAgent a({Action::accept()});
    ScriptedAgent b({Action::accept()});
    const auto r = run_session(a, b, p, 10, 1);
    ASSERT_TRUE(r.violation);
    EXPECT_EQ(r.violation->violator, Side::A);
    EXPECT_FALSE(r.agreed);
  }
  {
    ScriptedAgent a({Action::make_offer({0, 0})});
    ScriptedAgent b({Action::make_offer({5, 0})});
    const auto r = run_session(a, b, p, 10, 1);
    ASSERT_TRUE(r.violation);
    EXPECT_EQ(r.violation->violator, Side::B);
    EXPECT_DOUBLE_EQ(r.utility_of(Side::A), 0.0);
  }
  {
    ScriptedAgent a({});
    ScriptedAgent b({Action::accept()});
    const auto r = run_session(a, b, p, 10, 1);
    ASSERT_TRUE(r.violation);
    EXPECT_EQ(r.violation->violator, Side::A);
  }
}

TEST(Session, RejectsTooFewRounds) {
  const auto p = two_issue_problem();
  ScriptedAgent a({Action::make_offer({0, 0})});
  ScriptedAgent b({Action::accept()});
  EXPECT_THROW(run_session(a, b, p, 1, 1), ConfigError);
}

TEST(Session, RandomSessionsAlternateAndReplay) {
  const auto roster = default_roster();
  ProblemGenSpec spec;
  for (std::uint64_t k = 0; k < 60; ++k) {
    const auto p = generate_problem(spec, derive_seed(5, k));
    const auto& oa = roster[k % roster.size()];
    const auto& ob = roster[(k * 7 + 3) % roster.size()];
    const Side first = k % 2 ? Side::A : Side::B;
    auto a = instantiate(oa, k);
    auto b = instantiate(ob, k + 1);
    const auto r = run_session(*a, *b, p, 60, k, first);
    ASSERT_FALSE(r.trace.empty());
    Side expected = first;
    for (const auto& e : r.trace) {
      ASSERT_EQ(e.actor, expected);
      expected = other(expected);
    }
    if (!r.agreed) {
      EXPECT_EQ(r.utility_of(Side::A), 0.0);
      EXPECT_EQ(r.utility_of(Side::B), 0.0);
    }
    auto a2 = instantiate(oa, k);
    auto b2 = instantiate(ob, k + 1);
    EXPECT_EQ(trace_digest(run_session(*a2, *b2, p, 60, k, first)), trace_digest(r));
  }
}

TEST(Session, DynamicAgentSessionsReplay) {
  const auto p = generate_problem(ProblemGenSpec{}, 42);
  const auto roster = default_roster();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DynamicAgent a1(AgentConfiguration{}), a2(AgentConfiguration{});
    auto o1 = instantiate(roster[seed], seed);
    auto o2 = instantiate(roster[seed], seed);
    const auto r1 = run_session(a1, *o1, p, 50, seed);
    const auto r2 = run_session(a2, *o2, p, 50, seed);
    EXPECT_EQ(trace_digest(r1), trace_digest(r2));
    EXPECT_EQ(r1.utility, r2.utility);
  }
}

TEST(Trace, OneJsonLinePerAction) {
  const auto p = two_issue_problem();
  ScriptedAgent a({Action::make_offer({0, 1})});
  ScriptedAgent b({Action::make_offer({2, 1}), Action::accept()});
  const auto r = run_session(a, b, p, 10, 1);
  std::ostringstream out;
  write_trace_jsonl(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    const auto doc = nlohmann::json::parse(line);
    EXPECT_TRUE(doc.contains("actor"));
    EXPECT_TRUE(doc.contains("kind"));
    EXPECT_TRUE(doc.contains("t"));
    EXPECT_EQ(doc.contains("outcome"), doc["kind"] == "offer");
    ++lines;
  }
  EXPECT_EQ(lines, r.trace.size());
  EXPECT_EQ(trace_digest(r).size(), 64u);
}
