#pragma once

#include <cstdint>
#include <string>

#include "negoforge/problem.hpp"

namespace negoforge {

// Random linear-additive problem generator. Issue and value counts are drawn
// uniformly from their ranges; weights are w_i ∝ U_i^weight_skew (0 gives
// uniform weights, larger values concentrate weight on few issues). The B
// profile's raw scores mix (1 - A score) and fresh noise by an opposition
// level drawn from [opposition_min, opposition_max], so generated problems
// range from cooperative to strictly competitive.
struct ProblemGenSpec {
  int min_issues = 2;
  int max_issues = 5;
  int min_values = 2;
  int max_values = 6;
  double weight_skew = 1.5;
  double opposition_min = 0.0;
  double opposition_max = 1.0;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
};

// Throws SpecError if the ranges are empty or out of bounds, or if the largest
// reachable outcome space exceeds the enumeration cap.
void validate(const ProblemGenSpec& spec);

BargainingProblem generate_problem(const ProblemGenSpec& spec, std::uint64_t seed,
                                   std::string id = {});

}  // namespace negoforge
