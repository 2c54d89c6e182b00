#pragma once

// Multi-issue bargaining problems with linear-additive utility profiles.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace negoforge {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

enum class Side : int { A = 0, B = 1 };

constexpr Side other(Side s) { return s == Side::A ? Side::B : Side::A; }
constexpr std::size_t index_of(Side s) { return static_cast<std::size_t>(s); }
std::string_view to_string(Side s);
Side side_from_string(std::string_view s);

struct Issue {
  std::string name;
  std::vector<std::string> values;
};

// One value index per issue.
using Outcome = std::vector<int>;

struct UtilityProfile {
  std::vector<double> weights;                   // per issue, sums to 1
  std::vector<std::vector<double>> valuations;   // [issue][value] in [0,1]
};

// Weighted sum of per-issue valuation scores. Throws InvalidOutcomeError on a
// dimension or range mismatch.
double utility(const UtilityProfile& profile, const Outcome& outcome);

struct BargainingProblem {
  std::string id;
  std::vector<Issue> issues;
  std::array<UtilityProfile, 2> profiles;

  const UtilityProfile& profile(Side s) const { return profiles[index_of(s)]; }
};

// Checks structural and normalization invariants; throws SpecError listing
// the first violation found.
void validate(const BargainingProblem& problem);

// Product of the value counts. Saturates at UINT64_MAX on overflow.
std::uint64_t outcome_count(const BargainingProblem& problem);

// Mixed-radix index with the first issue most significant, so index order
// equals lexicographic outcome order.
std::uint64_t outcome_index(const BargainingProblem& problem, const Outcome& outcome);
Outcome outcome_at(const BargainingProblem& problem, std::uint64_t index);

bool is_valid_outcome(const BargainingProblem& problem, const Outcome& outcome);

// Per-issue argmax/argmin of the valuations (lowest value index on ties).
// For linear-additive profiles these are the global best/worst outcomes.
Outcome best_outcome(const UtilityProfile& profile);
Outcome worst_outcome(const UtilityProfile& profile);

}  // namespace negoforge
