#pragma once

// Enumerated outcome space of a problem and the analytics built on it:
// weak Pareto frontier, Nash bargaining point and Euclidean distances in
// (u_A, u_B) space. Disagreement point is (0, 0).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "negoforge/problem.hpp"

namespace negoforge {

struct UtilityPoint {
  double a = 0.0;
  double b = 0.0;
};

class OutcomeSpace {
 public:
  // Throws EnumerationCapError when outcome_count(problem) > cap.
  explicit OutcomeSpace(const BargainingProblem& problem,
                        std::uint64_t cap = kDefaultEnumerationCap);

  std::size_t size() const { return utilities_[0].size(); }
  Outcome outcome(std::size_t index) const { return outcome_at(*problem_, index); }
  std::span<const double> utilities(Side s) const { return utilities_[index_of(s)]; }
  UtilityPoint point(std::size_t index) const {
    return {utilities_[0][index], utilities_[1][index]};
  }

  // Sorted outcome indices on the weak Pareto frontier.
  const std::vector<std::size_t>& pareto_indices() const { return pareto_; }
  // argmax u_A * u_B, lowest index on ties.
  std::size_t nash_index() const { return nash_; }

  double pareto_distance(UtilityPoint p) const;
  double nash_distance(UtilityPoint p) const;

 private:
  const BargainingProblem* problem_;
  std::array<std::vector<double>, 2> utilities_;
  std::vector<std::size_t> pareto_;
  std::size_t nash_ = 0;
};

// Sweep-based frontier over arbitrary points: indices not weakly dominated
// (another point >= in both coordinates and > in at least one), sorted.
std::vector<std::size_t> pareto_filter(std::span<const UtilityPoint> points);

std::vector<Outcome> pareto_frontier(const BargainingProblem& problem,
                                     std::uint64_t cap = kDefaultEnumerationCap);
Outcome nash_point(const BargainingProblem& problem,
                   std::uint64_t cap = kDefaultEnumerationCap);
double pareto_distance(const BargainingProblem& problem, const Outcome& outcome,
                       std::uint64_t cap = kDefaultEnumerationCap);
double nash_distance(const BargainingProblem& problem, const Outcome& outcome,
                     std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace negoforge
