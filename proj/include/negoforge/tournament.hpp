#pragma once

// Round-robin tournaments between our selector-driven agent and a roster of
// opponents, with the per-opponent encounter policy and the six report
// metrics.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "negoforge/features.hpp"
#include "negoforge/hydra.hpp"
#include "negoforge/opponents.hpp"
#include "negoforge/outcome_space.hpp"
#include "negoforge/selector.hpp"
#include "negoforge/session.hpp"

namespace negoforge {

struct SessionMetrics {
  double utility = 0.0;           // side A
  double opponent_utility = 0.0;  // side B
  double social_welfare = 0.0;
  double pareto_distance = 0.0;
  double nash_distance = 0.0;
  bool agreement = false;
};

// Distances are measured from the agreement point, or from (0, 0) when the
// session failed.
SessionMetrics session_metrics(const SessionResult& result, const OutcomeSpace& space);

// A domain played from one side: our agent (or the first agent of a pair)
// holds `side`.
struct PlayableProblem {
  std::size_t domain = 0;
  Side side = Side::A;
};

struct TournamentSpec {
  std::vector<BargainingProblem> domains;
  std::vector<OpponentSpec> opponents;
  int repetitions = 10;
  int max_rounds = kDefaultMaxRounds;
  std::uint64_t seed = 0;
  bool warmup = false;
  int workers = 1;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
};

struct OurAgent {
  std::string name = "DA(AS)";
  Portfolio portfolio;
  SelectorModel selector = SelectorModel::constant(1, 0);
};

struct SessionRecord {
  int repetition = 0;
  std::string problem;  // playable problem id
  std::string agent_a;  // holds profile A
  std::string agent_b;
  Side first_mover = Side::A;
  double t_agree = 1.0;
  SessionMetrics metrics;
  // Our agent's sessions only; -1 otherwise.
  int strategy = -1;
  int observations_before = -1;
  bool selector_used = false;
  bool observed = false;
  std::string violation;
};

struct AgentSummary {
  std::string agent;
  std::size_t sessions = 0;
  double utility = 0.0;
  double opponent_utility = 0.0;
  double social_welfare = 0.0;
  double pareto_distance = 0.0;
  double nash_distance = 0.0;
  double agreement_ratio = 0.0;
};

struct TournamentReport {
  std::vector<AgentSummary> agents;  // ours first, then roster order
  std::vector<SessionRecord> sessions;
  std::size_t warmup_sessions = 0;
  std::size_t expected_sessions = 0;
  std::string count_formula;

  const AgentSummary& agent(const std::string& name) const;
};

std::size_t expected_session_count(std::size_t repetitions, std::size_t playable_problems,
                                   std::size_t agents);

TournamentReport run_tournament(const TournamentSpec& spec, const OurAgent& ours);

// Markdown table (rows ranked by utility), per-session CSV and a long-format
// plot CSV (agent,metric,value).
std::string report_markdown(const TournamentReport& report);
std::string sessions_csv(const TournamentReport& report);
std::string plot_csv(const TournamentReport& report);
std::string report_hash(const TournamentReport& report);

struct MetricDelta {
  std::string metric;
  double ours = 0.0;
  double baseline = 0.0;
  double absolute = 0.0;
  double relative_percent = 0.0;  // (ours - baseline) / baseline * 100
};

double relative_delta_percent(double ours, double baseline);

// Deltas of `agent` between two reports over the same schedule. Throws
// ConfigError when the reports do not cover the same sessions.
std::vector<MetricDelta> compare_report(const TournamentReport& ours,
                                        const TournamentReport& baseline,
                                        const std::string& our_agent,
                                        const std::string& baseline_agent);
std::string comparison_markdown(const std::vector<MetricDelta>& deltas);

}  // namespace negoforge
