#include "negoforge/tournament.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <sstream>

#include "negoforge/digest.hpp"
#include "negoforge/dynamic_agent.hpp"
#include "negoforge/errors.hpp"
#include "negoforge/parallel.hpp"

namespace negoforge {

SessionMetrics session_metrics(const SessionResult& result, const OutcomeSpace& space) {
  SessionMetrics m;
  m.agreement = result.agreed;
  m.utility = result.agreed ? result.utility_of(Side::A) : 0.0;
  m.opponent_utility = result.agreed ? result.utility_of(Side::B) : 0.0;
  m.social_welfare = m.utility + m.opponent_utility;
  const UtilityPoint p{m.utility, m.opponent_utility};
  m.pareto_distance = space.pareto_distance(p);
  m.nash_distance = space.nash_distance(p);
  return m;
}

const AgentSummary& TournamentReport::agent(const std::string& name) const {
  for (const auto& a : agents) {
    if (a.agent == name) return a;
  }
  throw ConfigError("no agent named " + name + " in the report");
}

std::size_t expected_session_count(std::size_t repetitions, std::size_t playable_problems,
                                   std::size_t agents) {
  return repetitions * playable_problems * (agents * (agents - 1) / 2);
}

namespace {

struct Encounter {
  std::vector<OpponentObservation> observations;
};

struct PairSession {
  std::size_t playable;
  std::size_t first;   // roster index
  std::size_t second;  // roster index
};

SessionRecord make_record(int repetition, const std::string& problem, const std::string& a,
                          const std::string& b, Side first_mover, const SessionResult& result,
                          const OutcomeSpace& space) {
  SessionRecord rec;
  rec.repetition = repetition;
  rec.problem = problem;
  rec.agent_a = a;
  rec.agent_b = b;
  rec.first_mover = first_mover;
  rec.t_agree = result.t_agree;
  rec.metrics = session_metrics(result, space);
  if (result.violation) {
    rec.violation = std::string(to_string(result.violation->violator)) + ": " + result.violation->reason;
  }
  return rec;
}

}  // namespace

TournamentReport run_tournament(const TournamentSpec& spec, const OurAgent& ours) {
  if (spec.repetitions < 1) throw ConfigError("tournament needs at least one repetition");
  if (spec.domains.empty()) throw ConfigError("tournament needs at least one problem");
  if (ours.portfolio.empty()) throw ConfigError("tournament needs a non-empty portfolio");
  if (ours.selector.strategies() != ours.portfolio.size()) {
    throw ConfigError("selector was fitted for a portfolio of " +
                      std::to_string(ours.selector.strategies()) + " strategies, got " +
                      std::to_string(ours.portfolio.size()));
  }
  for (const auto& o : spec.opponents) {
    if (o.id == ours.name) throw ConfigError("opponent id collides with our agent name: " + o.id);
  }

  std::vector<std::unique_ptr<OutcomeSpace>> spaces;
  for (const auto& d : spec.domains) spaces.push_back(std::make_unique<OutcomeSpace>(d, spec.enumeration_cap));
  std::vector<PlayableProblem> playable;
  std::vector<ProblemFeatures> playable_features;
  for (std::size_t d = 0; d < spec.domains.size(); ++d) {
    for (Side side : {Side::A, Side::B}) {
      playable.push_back({d, side});
      playable_features.push_back(problem_features(spec.domains[d], side, spec.enumeration_cap));
    }
  }
  auto playable_id = [&](std::size_t p) {
    return spec.domains[playable[p].domain].id + ":" + std::string(to_string(playable[p].side));
  };

  const std::size_t n_opp = spec.opponents.size();
  std::vector<PairSession> pairs;
  for (std::size_t p = 0; p < playable.size(); ++p) {
    for (std::size_t i = 0; i < n_opp; ++i) {
      for (std::size_t j = i + 1; j < n_opp; ++j) pairs.push_back({p, i, j});
    }
  }

  const std::uint64_t session_base = stream_seed(spec.seed, "sessions");
  TournamentReport report;
  report.expected_sessions = expected_session_count(static_cast<std::size_t>(spec.repetitions),
                                                    playable.size(), n_opp + 1);
  report.count_formula = std::to_string(spec.repetitions) + " repetitions x " +
                         std::to_string(playable.size()) + " problems (" +
                         std::to_string(spec.domains.size()) + " domains x 2 sides) x C(" +
                         std::to_string(n_opp + 1) + ", 2) pairs = " +
                         std::to_string(report.expected_sessions) + " sessions";

  for (int rep = 0; rep < spec.repetitions; ++rep) {
    const Side first_mover = rep % 2 == 0 ? Side::A : Side::B;
    std::vector<Encounter> encounters(n_opp);

    auto play_ours = [&](std::size_t p, std::size_t o, std::size_t strategy, std::uint64_t seed) {
      const auto& problem = spec.domains[playable[p].domain];
      DynamicAgent agent(ours.portfolio[strategy].config, ours.name);
      auto opponent = instantiate(spec.opponents[o], seed);
      const Side our_side = playable[p].side;
      return our_side == Side::A
                 ? run_session(agent, *opponent, problem, spec.max_rounds, seed, first_mover)
                 : run_session(*opponent, agent, problem, spec.max_rounds, seed, first_mover);
    };

    if (spec.warmup) {
      Rng rng(derive_seed(stream_seed(spec.seed, "warmup"), static_cast<std::uint64_t>(rep)));
      for (std::size_t o = 0; o < n_opp; ++o) {
        const std::size_t p = uniform_index(rng, playable.size());
        play_ours(p, o, 0, derive_seed(stream_seed(spec.seed, "warmup-sessions"), rep, o));
        ++report.warmup_sessions;
      }
      // Observations from the warmup are wiped; encounter state starts empty.
    }

    std::vector<std::pair<std::size_t, std::size_t>> schedule;
    for (std::size_t p = 0; p < playable.size(); ++p) {
      for (std::size_t o = 0; o < n_opp; ++o) schedule.emplace_back(p, o);
    }
    Rng order_rng(derive_seed(stream_seed(spec.seed, "schedule"), static_cast<std::uint64_t>(rep)));
    std::shuffle(schedule.begin(), schedule.end(), order_rng);

    for (const auto& [p, o] : schedule) {
      auto& enc = encounters[o];
      std::size_t strategy = 0;
      bool selector_used = false;
      const int observations_before = static_cast<int>(enc.observations.size());
      if (enc.observations.size() >= 2) {
        const auto features = SettingFeatures::make(playable_features[p], aggregate(enc.observations));
        strategy = ours.selector.select(features);
        selector_used = true;
      }
      const std::uint64_t seed = derive_seed(session_base, static_cast<std::uint64_t>(rep), p, 0, o + 1);
      const SessionResult result = play_ours(p, o, strategy, seed);

      const Side our_side = playable[p].side;
      const std::string& opp_name = spec.opponents[o].id;
      SessionRecord rec = make_record(rep, playable_id(p), our_side == Side::A ? ours.name : opp_name,
                                      our_side == Side::A ? opp_name : ours.name, first_mover, result,
                                      *spaces[playable[p].domain]);
      rec.strategy = static_cast<int>(strategy);
      rec.observations_before = observations_before;
      rec.selector_used = selector_used;
      if (strategy == 0) {
        const auto& problem = spec.domains[playable[p].domain];
        const auto estimate = estimated_opponent_utility(result, problem, our_side);
        if (auto obs = opponent_observation(result, problem, our_side, estimate)) {
          enc.observations.push_back(*obs);
          rec.observed = true;
        }
      }
      report.sessions.push_back(std::move(rec));
    }

    auto pair_records = parallel_map<SessionRecord>(
        pairs.size(),
        [&](std::size_t k) {
          const auto& ps = pairs[k];
          const auto& problem = spec.domains[playable[ps.playable].domain];
          const std::uint64_t seed = derive_seed(session_base, static_cast<std::uint64_t>(rep),
                                                 ps.playable, ps.first + 1, ps.second + 1);
          auto first = instantiate(spec.opponents[ps.first], derive_seed(seed, 1));
          auto second = instantiate(spec.opponents[ps.second], derive_seed(seed, 2));
          const bool first_is_a = playable[ps.playable].side == Side::A;
          NegotiatingAgent& a = first_is_a ? *first : *second;
          NegotiatingAgent& b = first_is_a ? *second : *first;
          const SessionResult result = run_session(a, b, problem, spec.max_rounds, seed, first_mover);
          const auto& ida = spec.opponents[first_is_a ? ps.first : ps.second].id;
          const auto& idb = spec.opponents[first_is_a ? ps.second : ps.first].id;
          return make_record(rep, playable_id(ps.playable), ida, idb, first_mover, result,
                             *spaces[playable[ps.playable].domain]);
        },
        spec.workers);
    for (auto& r : pair_records) report.sessions.push_back(std::move(r));
  }

  std::vector<std::string> names{ours.name};
  for (const auto& o : spec.opponents) names.push_back(o.id);
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < names.size(); ++k) index[names[k]] = k;
  report.agents.resize(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) report.agents[k].agent = names[k];
  for (const auto& rec : report.sessions) {
    for (bool is_a : {true, false}) {
      auto& s = report.agents[index.at(is_a ? rec.agent_a : rec.agent_b)];
      ++s.sessions;
      s.utility += is_a ? rec.metrics.utility : rec.metrics.opponent_utility;
      s.opponent_utility += is_a ? rec.metrics.opponent_utility : rec.metrics.utility;
      s.social_welfare += rec.metrics.social_welfare;
      s.pareto_distance += rec.metrics.pareto_distance;
      s.nash_distance += rec.metrics.nash_distance;
      s.agreement_ratio += rec.metrics.agreement ? 1.0 : 0.0;
    }
  }
  for (auto& s : report.agents) {
    if (s.sessions == 0) continue;
    const double n = static_cast<double>(s.sessions);
    s.utility /= n;
    s.opponent_utility /= n;
    s.social_welfare /= n;
    s.pareto_distance /= n;
    s.nash_distance /= n;
    s.agreement_ratio /= n;
  }
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string exact(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string report_markdown(const TournamentReport& report) {
  std::vector<const AgentSummary*> ranked;
  for (const auto& a : report.agents) ranked.push_back(&a);
  std::stable_sort(ranked.begin(), ranked.end(), [](const AgentSummary* x, const AgentSummary* y) {
    return x->utility > y->utility;
  });
  std::ostringstream out;
  out << "| Agent | Utility | Opponent utility | Social welfare | Pareto distance | Nash distance | "
         "Agreement ratio |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto* a : ranked) {
    out << "| " << a->agent << " | " << fixed(a->utility, 4) << " | " << fixed(a->opponent_utility, 4)
        << " | " << fixed(a->social_welfare, 4) << " | " << fixed(a->pareto_distance, 4) << " | "
        << fixed(a->nash_distance, 4) << " | " << fixed(a->agreement_ratio, 4) << " |\n";
  }
  out << "\nSessions: " << report.count_formula << " (recorded " << report.sessions.size();
  if (report.warmup_sessions > 0) out << ", plus " << report.warmup_sessions << " warmup";
  out << ")\n";
  return out.str();
}

std::string sessions_csv(const TournamentReport& report) {
  std::ostringstream out;
  out << "repetition,problem,agent_a,agent_b,first_mover,agreement,t_agree,utility_a,utility_b,"
         "social_welfare,pareto_distance,nash_distance,strategy,observations_before,selector_used,"
         "observed,violation\n";
  for (const auto& r : report.sessions) {
    std::string violation = r.violation;
    std::replace(violation.begin(), violation.end(), ',', ';');
    std::replace(violation.begin(), violation.end(), '\n', ' ');
    out << r.repetition << ',' << r.problem << ',' << r.agent_a << ',' << r.agent_b << ','
        << to_string(r.first_mover) << ',' << (r.metrics.agreement ? 1 : 0) << ',' << exact(r.t_agree)
        << ',' << exact(r.metrics.utility) << ',' << exact(r.metrics.opponent_utility) << ','
        << exact(r.metrics.social_welfare) << ',' << exact(r.metrics.pareto_distance) << ','
        << exact(r.metrics.nash_distance) << ',' << r.strategy << ',' << r.observations_before << ','
        << (r.selector_used ? 1 : 0) << ',' << (r.observed ? 1 : 0) << ',' << violation << '\n';
  }
  return out.str();
}

std::string plot_csv(const TournamentReport& report) {
  std::ostringstream out;
  out << "agent,metric,value\n";
  for (const auto& a : report.agents) {
    out << a.agent << ",utility," << exact(a.utility) << '\n';
    out << a.agent << ",opponent_utility," << exact(a.opponent_utility) << '\n';
    out << a.agent << ",social_welfare," << exact(a.social_welfare) << '\n';
    out << a.agent << ",pareto_distance," << exact(a.pareto_distance) << '\n';
    out << a.agent << ",nash_distance," << exact(a.nash_distance) << '\n';
    out << a.agent << ",agreement_ratio," << exact(a.agreement_ratio) << '\n';
  }
  return out.str();
}

std::string report_hash(const TournamentReport& report) {
  return sha256_hex(report_markdown(report) + sessions_csv(report));
}

double relative_delta_percent(double ours, double baseline) {
  if (baseline == 0.0) return ours == 0.0 ? 0.0 : std::copysign(INFINITY, ours);
  return (ours - baseline) / baseline * 100.0;
}

std::vector<MetricDelta> compare_report(const TournamentReport& ours,
                                        const TournamentReport& baseline,
                                        const std::string& our_agent,
                                        const std::string& baseline_agent) {
  if (ours.sessions.size() != baseline.sessions.size() ||
      ours.expected_sessions != baseline.expected_sessions) {
    throw ConfigError("reports cover different tournament schedules");
  }
  for (std::size_t k = 0; k < ours.sessions.size(); ++k) {
    if (ours.sessions[k].problem != baseline.sessions[k].problem ||
        ours.sessions[k].repetition != baseline.sessions[k].repetition) {
      throw ConfigError("reports cover different tournament schedules");
    }
  }
  const auto& a = ours.agent(our_agent);
  const auto& b = baseline.agent(baseline_agent);
  std::vector<MetricDelta> out;
  auto add = [&](const std::string& name, double x, double y) {
    out.push_back({name, x, y, x - y, relative_delta_percent(x, y)});
  };
  add("utility", a.utility, b.utility);
  add("opponent_utility", a.opponent_utility, b.opponent_utility);
  add("social_welfare", a.social_welfare, b.social_welfare);
  add("pareto_distance", a.pareto_distance, b.pareto_distance);
  add("nash_distance", a.nash_distance, b.nash_distance);
  add("agreement_ratio", a.agreement_ratio, b.agreement_ratio);
  return out;
}

std::string comparison_markdown(const std::vector<MetricDelta>& deltas) {
  std::ostringstream out;
  out << "| Metric | Selector | Baseline | Delta | Relative |\n|---|---|---|---|---|\n";
  for (const auto& d : deltas) {
    out << "| " << d.metric << " | " << fixed(d.ours, 4) << " | " << fixed(d.baseline, 4) << " | "
        << (d.absolute >= 0 ? "+" : "") << fixed(d.absolute, 4) << " | "
        << (d.relative_percent >= 0 ? "+" : "") << fixed(d.relative_percent, 1) << "% |\n";
  }
  return out.str();
}

}  // namespace negoforge
