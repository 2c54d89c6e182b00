#include "negoforge/problem.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "negoforge/errors.hpp"

namespace negoforge {

std::string_view to_string(Side s) { return s == Side::A ? "A" : "B"; }

Side side_from_string(std::string_view s) {
  if (s == "A") return Side::A;
  if (s == "B") return Side::B;
  throw SpecError("unknown side '" + std::string(s) + "'");
}

double utility(const UtilityProfile& profile, const Outcome& outcome) {
  if (outcome.size() != profile.weights.size() ||
      outcome.size() != profile.valuations.size()) {
    throw InvalidOutcomeError("outcome has " + std::to_string(outcome.size()) +
                              " issues, profile has " +
                              std::to_string(profile.weights.size()));
  }
  double u = 0.0;
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    const auto& scores = profile.valuations[i];
    const int v = outcome[i];
    if (v < 0 || static_cast<std::size_t>(v) >= scores.size()) {
      throw InvalidOutcomeError("value index " + std::to_string(v) +
                                " out of range for issue " + std::to_string(i));
    }
    u += profile.weights[i] * scores[static_cast<std::size_t>(v)];
  }
  return u;
}

namespace {

void validate_profile(const BargainingProblem& p, Side side) {
  const auto& prof = p.profile(side);
  const std::string tag = "profile " + std::string(to_string(side));
  if (prof.weights.size() != p.issues.size() ||
      prof.valuations.size() != p.issues.size()) {
    throw SpecError(tag + ": issue count mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.issues.size(); ++i) {
    const double w = prof.weights[i];
    if (!(w >= 0.0 && w <= 1.0)) {
      throw SpecError(tag + ": weight of issue '" + p.issues[i].name + "' outside [0,1]");
    }
    sum += w;
    const auto& scores = prof.valuations[i];
    if (scores.size() != p.issues[i].values.size()) {
      throw SpecError(tag + ": value count mismatch on issue '" + p.issues[i].name + "'");
    }
    bool has_top = false;
    for (double s : scores) {
      if (!(s >= 0.0 && s <= 1.0)) {
        throw SpecError(tag + ": score outside [0,1] on issue '" + p.issues[i].name + "'");
      }
      has_top = has_top || s == 1.0;
    }
    if (!has_top) {
      throw SpecError(tag + ": issue '" + p.issues[i].name + "' has no value scored 1");
    }
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw SpecError(tag + ": weights sum to " + std::to_string(sum));
  }
}

}  // namespace

void validate(const BargainingProblem& p) {
  if (p.issues.empty()) throw SpecError("problem '" + p.id + "' has no issues");
  std::set<std::string> names;
  for (const auto& issue : p.issues) {
    if (!names.insert(issue.name).second) {
      throw SpecError("duplicate issue name '" + issue.name + "'");
    }
    if (issue.values.size() < 2) {
      throw SpecError("issue '" + issue.name + "' has fewer than 2 values");
    }
    std::set<std::string> labels(issue.values.begin(), issue.values.end());
    if (labels.size() != issue.values.size()) {
      throw SpecError("issue '" + issue.name + "' has duplicate value labels");
    }
  }
  validate_profile(p, Side::A);
  validate_profile(p, Side::B);
}

std::uint64_t outcome_count(const BargainingProblem& problem) {
  std::uint64_t n = 1;
  for (const auto& issue : problem.issues) {
    const std::uint64_t k = issue.values.size();
    if (k != 0 && n > std::numeric_limits<std::uint64_t>::max() / k) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    n *= k;
  }
  return n;
}

bool is_valid_outcome(const BargainingProblem& problem, const Outcome& outcome) {
  if (outcome.size() != problem.issues.size()) return false;
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    if (outcome[i] < 0 ||
        static_cast<std::size_t>(outcome[i]) >= problem.issues[i].values.size()) {
      return false;
    }
  }
  return true;
}

std::uint64_t outcome_index(const BargainingProblem& problem, const Outcome& outcome) {
  if (!is_valid_outcome(problem, outcome)) {
    throw InvalidOutcomeError("outcome does not fit problem '" + problem.id + "'");
  }
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < outcome.size(); ++i) {
    idx = idx * problem.issues[i].values.size() + static_cast<std::uint64_t>(outcome[i]);
  }
  return idx;
}

Outcome outcome_at(const BargainingProblem& problem, std::uint64_t index) {
  Outcome out(problem.issues.size());
  for (std::size_t i = problem.issues.size(); i-- > 0;) {
    const std::uint64_t k = problem.issues[i].values.size();
    out[i] = static_cast<int>(index % k);
    index /= k;
  }
  if (index != 0) throw InvalidOutcomeError("outcome index out of range");
  return out;
}

namespace {

template <typename Better>
Outcome extreme_outcome(const UtilityProfile& profile, Better better) {
  Outcome out(profile.valuations.size(), 0);
  for (std::size_t i = 0; i < profile.valuations.size(); ++i) {
    const auto& scores = profile.valuations[i];
    for (std::size_t v = 1; v < scores.size(); ++v) {
      if (better(scores[v], scores[static_cast<std::size_t>(out[i])])) {
        out[i] = static_cast<int>(v);
      }
    }
  }
  return out;
}

}  // namespace

Outcome best_outcome(const UtilityProfile& profile) {
  return extreme_outcome(profile, [](double a, double b) { return a > b; });
}

Outcome worst_outcome(const UtilityProfile& profile) {
  return extreme_outcome(profile, [](double a, double b) { return a < b; });
}

}  // namespace negoforge
