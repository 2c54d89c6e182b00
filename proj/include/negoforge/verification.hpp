#pragma once

// Self-checks behind `negoforge verify`: brute-force cross-checks of the
// analytics and the portfolio/selector guarantees on random inputs.

#include <cstdint>
#include <string>
#include <vector>

namespace negoforge {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::vector<std::string> diagnostics;
};

CheckResult check_problem_features(std::uint64_t seed, int problems);
CheckResult check_pareto_nash(std::uint64_t seed, int problems);
CheckResult check_modified_metric(std::uint64_t seed, int draws);
CheckResult check_selector_guarantee(std::uint64_t seed, int matrices);

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed);

}  // namespace negoforge
