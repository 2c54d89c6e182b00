#include "negoforge/verification.hpp"

#include <cmath>
#include <cstdio>

#include "negoforge/features.hpp"
#include "negoforge/hydra.hpp"
#include "negoforge/outcome_space.hpp"
#include "negoforge/problem_gen.hpp"
#include "negoforge/selector.hpp"

namespace negoforge {

namespace {

ProblemGenSpec small_problems() {
  ProblemGenSpec spec;
  spec.min_issues = 1;
  spec.max_issues = 5;
  spec.min_values = 2;
  spec.max_values = 6;
  spec.enumeration_cap = 10'000;
  return spec;
}

// Utilities of every outcome in lexicographic order, computed with an
// explicit odometer.
std::vector<double> brute_utilities(const BargainingProblem& p, Side side) {
  const auto& prof = p.profile(side);
  std::vector<int> digits(p.issues.size(), 0);
  std::vector<double> out;
  while (true) {
    double u = 0.0;
    for (std::size_t i = 0; i < digits.size(); ++i) {
      u += prof.weights[i] * prof.valuations[i][static_cast<std::size_t>(digits[i])];
    }
    out.push_back(u);
    std::size_t i = digits.size();
    while (i > 0) {
      --i;
      if (++digits[i] < static_cast<int>(p.issues[i].values.size())) break;
      digits[i] = 0;
      if (i == 0) return out;
    }
  }
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

CheckResult check_problem_features(std::uint64_t seed, int problems) {
  CheckResult res{"problem features match brute-force enumeration", true, {}};
  for (int k = 0; k < problems; ++k) {
    const auto p = generate_problem(small_problems(), derive_seed(seed, k), "verify-" + std::to_string(k));
    for (Side side : {Side::A, Side::B}) {
      const auto f = problem_features(p, side);
      const auto u = brute_utilities(p, side);
      const double n = static_cast<double>(u.size());
      double mean = 0.0;
      for (double x : u) mean += x;
      mean /= n;
      double var = 0.0;
      for (double x : u) var += (x - mean) * (x - mean);
      const auto& w = p.profile(side).weights;
      double wvar = 0.0;
      for (double x : w) wvar += (x - 1.0 / w.size()) * (x - 1.0 / w.size());
      double values = 0.0;
      for (const auto& i : p.issues) values += static_cast<double>(i.values.size());
      const double expect[6] = {static_cast<double>(p.issues.size()), values / p.issues.size(), n,
                                std::sqrt(wvar / w.size()), mean, std::sqrt(var / n)};
      const double got[6] = {f.n_issues, f.avg_values_per_issue, f.n_outcomes,
                             f.std_issue_weights, f.mean_utility, f.std_utility};
      for (int j = 0; j < 6; ++j) {
        if (std::abs(expect[j] - got[j]) > 1e-9) {
          res.passed = false;
          res.diagnostics.push_back(p.id + " feature " + feature_names()[static_cast<std::size_t>(j)] +
                                    fmt(": expected %.17g got %.17g", expect[j], got[j]));
        }
      }
    }
  }
  return res;
}

CheckResult check_pareto_nash(std::uint64_t seed, int problems) {
  CheckResult res{"Pareto frontier and Nash point match brute force", true, {}};
  for (int k = 0; k < problems; ++k) {
    const auto p = generate_problem(small_problems(), derive_seed(seed, k), "verify-" + std::to_string(k));
    const auto ua = brute_utilities(p, Side::A);
    const auto ub = brute_utilities(p, Side::B);
    std::vector<std::size_t> frontier;
    for (std::size_t i = 0; i < ua.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < ua.size() && !dominated; ++j) {
        dominated = ua[j] >= ua[i] && ub[j] >= ub[i] && (ua[j] > ua[i] || ub[j] > ub[i]);
      }
      if (!dominated) frontier.push_back(i);
    }
    std::size_t nash = 0;
    for (std::size_t i = 1; i < ua.size(); ++i) {
      if (ua[i] * ub[i] > ua[nash] * ub[nash]) nash = i;
    }
    const OutcomeSpace space(p);
    if (space.pareto_indices() != frontier) {
      res.passed = false;
      res.diagnostics.push_back(p.id + ": frontier differs (" + std::to_string(space.pareto_indices().size()) +
                                " vs " + std::to_string(frontier.size()) + " outcomes)");
    }
    if (space.nash_index() != nash) {
      res.passed = false;
      res.diagnostics.push_back(p.id + ": Nash outcome index " + std::to_string(space.nash_index()) +
                                " vs " + std::to_string(nash));
    }
  }
  return res;
}

CheckResult check_modified_metric(std::uint64_t seed, int draws) {
  CheckResult res{"modified metric dominates base and selected scores", true, {}};
  Rng rng(seed);
  const std::size_t settings = 12;
  std::vector<std::string> ids;
  std::vector<SettingFeatures> features(settings);
  for (std::size_t s = 0; s < settings; ++s) {
    ids.push_back("s" + std::to_string(s));
    features[s].opponent_known = true;
    for (double& v : features[s].values) v = uniform01(rng);
  }
  PerformanceMatrix matrix(ids);
  Portfolio portfolio;
  ConfigurationSpace space;
  for (int t = 0; t < 3; ++t) {
    portfolio.push_back({space.sample(rng), static_cast<std::size_t>(t + 1), 0});
    matrix.add_strategy(strategy_id(static_cast<std::size_t>(t)));
    for (std::size_t s = 0; s < settings; ++s) matrix.add_run(static_cast<std::size_t>(t), s, uniform01(rng));
  }
  const auto selector = fit_selector(matrix, features, SelectorSearchSpec{}, seed);
  const Metric base = [](const AgentConfiguration& c, std::size_t s, std::uint64_t sd) {
    return static_cast<double>(mix64(sd ^ mix64(s) ^ static_cast<std::uint64_t>(c.delta * 1e9)) >> 11) * 0x1.0p-53;
  };
  const Metric modified = make_modified_metric(base, portfolio, matrix, selector, features, seed);
  for (int k = 0; k < draws; ++k) {
    const auto theta = space.sample(rng);
    const std::size_t s = uniform_index(rng, settings);
    const std::uint64_t sd = rng();
    const double b = base(theta, s, sd);
    const double sel = matrix.mean(selector.select(features[s]), s);
    const double m = modified(theta, s, sd);
    if (!(m >= b && m >= sel)) {
      res.passed = false;
      res.diagnostics.push_back("draw " + std::to_string(k) + fmt(": modified %.17g below max of base/selected (%.17g)", m, std::max(b, sel)));
    }
  }
  return res;
}

CheckResult check_selector_guarantee(std::uint64_t seed, int matrices) {
  CheckResult res{"R(OR,S) >= R(AS,S) >= R(theta1,S) on training matrices", true, {}};
  Rng rng(seed);
  SelectorSearchSpec spec;
  spec.forest.trees = 10;
  for (auto& c : spec.candidates) {
    if (c.method != SelectorMethod::NearestNeighbor) c.param = std::min(c.param, 10);
  }
  for (int k = 0; k < matrices; ++k) {
    const std::size_t settings = 20;
    std::vector<std::string> ids;
    std::vector<SettingFeatures> features(settings);
    for (std::size_t s = 0; s < settings; ++s) {
      ids.push_back("s" + std::to_string(s));
      features[s].opponent_known = true;
      for (double& v : features[s].values) v = uniform01(rng);
    }
    PerformanceMatrix m(ids);
    for (std::size_t t = 0; t < 3; ++t) {
      m.add_strategy(strategy_id(t));
      for (std::size_t s = 0; s < settings; ++s) m.add_run(t, s, uniform01(rng));
    }
    const auto model = fit_selector(m, features, spec, rng());
    const double orc = oracle_performance(m);
    const double as = selector_performance(model, m, features);
    const double first = m.row_mean(0);
    if (!(orc >= as && as >= first)) {
      res.passed = false;
      char buf[160];
      std::snprintf(buf, sizeof buf, "matrix %d: oracle %.6f selector %.6f theta1 %.6f", k, orc, as, first);
      res.diagnostics.emplace_back(buf);
    }
  }
  return res;
}

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed) {
  return {check_problem_features(stream_seed(seed, "verify-features"), 20),
          check_pareto_nash(stream_seed(seed, "verify-pareto"), 20),
          check_modified_metric(stream_seed(seed, "verify-metric"), 1000),
          check_selector_guarantee(stream_seed(seed, "verify-selector"), 5)};
}

}  // namespace negoforge
