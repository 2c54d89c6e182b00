#include "negoforge/problem_gen.hpp"

#include <algorithm>
#include <cmath>

#include "negoforge/errors.hpp"
#include "negoforge/random.hpp"

namespace negoforge {

void validate(const ProblemGenSpec& spec) {
  if (spec.min_issues < 1 || spec.max_issues < spec.min_issues) {
    throw SpecError("issue range must satisfy 1 <= min_issues <= max_issues");
  }
  if (spec.min_values < 2 || spec.max_values < spec.min_values) {
    throw SpecError("value range must satisfy 2 <= min_values <= max_values");
  }
  if (!(spec.weight_skew >= 0.0) || !std::isfinite(spec.weight_skew)) {
    throw SpecError("weight_skew must be finite and >= 0");
  }
  if (!(spec.opposition_min >= 0.0 && spec.opposition_max <= 1.0 &&
        spec.opposition_min <= spec.opposition_max)) {
    throw SpecError("opposition range must lie within [0,1]");
  }
  double largest = std::pow(static_cast<double>(spec.max_values), spec.max_issues);
  if (largest > static_cast<double>(spec.enumeration_cap)) {
    throw SpecError("largest reachable outcome space (" +
                    std::to_string(static_cast<long double>(largest)) +
                    ") exceeds the enumeration cap");
  }
}

namespace {

std::vector<double> normalized_to_top(std::vector<double> raw) {
  const double top = *std::max_element(raw.begin(), raw.end());
  for (double& x : raw) x = top > 0.0 ? x / top : 1.0;
  return raw;
}

std::vector<double> draw_weights(std::size_t n, double skew, Rng& rng) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& x : w) {
    // Keep the base away from 0 so pow() never yields an all-zero vector.
    x = std::pow(0.05 + 0.95 * uniform01(rng), skew);
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

}  // namespace

BargainingProblem generate_problem(const ProblemGenSpec& spec, std::uint64_t seed,
                                   std::string id) {
  validate(spec);
  Rng rng(seed);
  BargainingProblem p;
  p.id = id.empty() ? "problem-" + std::to_string(seed) : std::move(id);

  const int n_issues =
      std::uniform_int_distribution<int>(spec.min_issues, spec.max_issues)(rng);
  const double opposition =
      spec.opposition_min + (spec.opposition_max - spec.opposition_min) * uniform01(rng);

  for (int i = 0; i < n_issues; ++i) {
    Issue issue;
    issue.name = "issue" + std::to_string(i);
    const int k = std::uniform_int_distribution<int>(spec.min_values, spec.max_values)(rng);
    for (int v = 0; v < k; ++v) issue.values.push_back("v" + std::to_string(v));
    p.issues.push_back(std::move(issue));
  }

  for (auto& prof : p.profiles) {
    prof.weights = draw_weights(p.issues.size(), spec.weight_skew, rng);
  }
  for (const auto& issue : p.issues) {
    const std::size_t k = issue.values.size();
    std::vector<double> a(k);
    std::vector<double> b(k);
    for (std::size_t v = 0; v < k; ++v) a[v] = uniform01(rng);
    a = normalized_to_top(std::move(a));
    for (std::size_t v = 0; v < k; ++v) {
      b[v] = opposition * (1.0 - a[v]) + (1.0 - opposition) * uniform01(rng);
    }
    p.profiles[0].valuations.push_back(std::move(a));
    p.profiles[1].valuations.push_back(normalized_to_top(std::move(b)));
  }
  return p;
}

}  // namespace negoforge
