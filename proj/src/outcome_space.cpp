#include "negoforge/outcome_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "negoforge/errors.hpp"

namespace negoforge {

OutcomeSpace::OutcomeSpace(const BargainingProblem& problem, std::uint64_t cap)
    : problem_(&problem) {
  const std::uint64_t n = outcome_count(problem);
  if (n > cap) {
    throw EnumerationCapError("problem '" + problem.id + "' has " + std::to_string(n) +
                              " outcomes, cap is " + std::to_string(cap));
  }
  const std::size_t issues = problem.issues.size();
  for (auto& u : utilities_) u.assign(n, 0.0);

  // Odometer walk in index order; utilities accumulate per issue exactly as
  // utility() does so both routes agree bit-for-bit.
  Outcome cur(issues, 0);
  for (std::size_t idx = 0; idx < n; ++idx) {
    for (std::size_t s = 0; s < 2; ++s) {
      const auto& prof = problem.profiles[s];
      double u = 0.0;
      for (std::size_t i = 0; i < issues; ++i) {
        u += prof.weights[i] * prof.valuations[i][static_cast<std::size_t>(cur[i])];
      }
      utilities_[s][idx] = u;
    }
    for (std::size_t i = issues; i-- > 0;) {
      if (++cur[i] < static_cast<int>(problem.issues[i].values.size())) break;
      cur[i] = 0;
    }
  }

  std::vector<UtilityPoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = point(i);
  pareto_ = pareto_filter(pts);

  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double prod = pts[i].a * pts[i].b;
    if (prod > best) {
      best = prod;
      nash_ = i;
    }
  }
}

std::vector<std::size_t> pareto_filter(std::span<const UtilityPoint> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (points[x].a != points[y].a) return points[x].a > points[y].a;
    if (points[x].b != points[y].b) return points[x].b > points[y].b;
    return x < y;
  });

  std::vector<std::size_t> frontier;
  // Highest b among points with strictly larger a than the current group.
  double best_b_before = -std::numeric_limits<double>::infinity();
  std::size_t g = 0;
  while (g < order.size()) {
    std::size_t end = g;
    while (end < order.size() && points[order[end]].a == points[order[g]].a) ++end;
    const double group_max_b = points[order[g]].b;
    if (group_max_b > best_b_before) {
      for (std::size_t k = g; k < end && points[order[k]].b == group_max_b; ++k) {
        frontier.push_back(order[k]);
      }
    }
    best_b_before = std::max(best_b_before, group_max_b);
    g = end;
  }
  std::sort(frontier.begin(), frontier.end());
  return frontier;
}

double OutcomeSpace::pareto_distance(UtilityPoint p) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t idx : pareto_) {
    const UtilityPoint q = point(idx);
    best = std::min(best, std::hypot(p.a - q.a, p.b - q.b));
  }
  return best;
}

double OutcomeSpace::nash_distance(UtilityPoint p) const {
  const UtilityPoint q = point(nash_);
  return std::hypot(p.a - q.a, p.b - q.b);
}

std::vector<Outcome> pareto_frontier(const BargainingProblem& problem, std::uint64_t cap) {
  const OutcomeSpace space(problem, cap);
  std::vector<Outcome> out;
  out.reserve(space.pareto_indices().size());
  for (std::size_t idx : space.pareto_indices()) out.push_back(space.outcome(idx));
  return out;
}

Outcome nash_point(const BargainingProblem& problem, std::uint64_t cap) {
  const OutcomeSpace space(problem, cap);
  return space.outcome(space.nash_index());
}

namespace {

UtilityPoint point_of(const BargainingProblem& problem, const Outcome& outcome) {
  return {utility(problem.profile(Side::A), outcome),
          utility(problem.profile(Side::B), outcome)};
}

}  // namespace

double pareto_distance(const BargainingProblem& problem, const Outcome& outcome,
                       std::uint64_t cap) {
  const UtilityPoint p = point_of(problem, outcome);
  return OutcomeSpace(problem, cap).pareto_distance(p);
}

double nash_distance(const BargainingProblem& problem, const Outcome& outcome,
                     std::uint64_t cap) {
  const UtilityPoint p = point_of(problem, outcome);
  return OutcomeSpace(problem, cap).nash_distance(p);
}

}  // namespace negoforge
