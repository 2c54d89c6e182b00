#pragma once

// Setting features: six problem features and eight aggregated opponent
// features (mean and coefficient of variation of four per-session
// observations).

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "negoforge/problem.hpp"
#include "negoforge/session.hpp"

namespace negoforge {

struct ProblemFeatures {
  double n_issues = 0.0;
  double avg_values_per_issue = 0.0;
  double n_outcomes = 0.0;
  double std_issue_weights = 0.0;
  double mean_utility = 0.0;
  double std_utility = 0.0;
};

struct OpponentObservation {
  double t_agree = 1.0;
  double concession_rate = 0.0;
  double avg_offer_rate = 0.0;
  double default_strategy_performance = 0.0;

  friend bool operator==(const OpponentObservation&, const OpponentObservation&) = default;
};

struct OpponentFeatures {
  std::array<double, 4> mean{};
  std::array<double, 4> cov{};
};

inline constexpr std::size_t kNumProblemFeatures = 6;
inline constexpr std::size_t kNumOpponentFeatures = 8;
inline constexpr std::size_t kNumSettingFeatures = kNumProblemFeatures + kNumOpponentFeatures;

// Fixed-order 14-vector. When the opponent block is unknown its slots hold
// NaN and opponent_known is false.
struct SettingFeatures {
  std::array<double, kNumSettingFeatures> values{};
  bool opponent_known = false;

  static SettingFeatures make(const ProblemFeatures& p,
                              const std::optional<OpponentFeatures>& o);
};

const std::array<std::string, kNumSettingFeatures>& feature_names();

// Throws EnumerationCapError when |Ω| exceeds the cap.
ProblemFeatures problem_features(const BargainingProblem& problem, Side side,
                                 std::uint64_t cap = kDefaultEnumerationCap);

using UtilityEstimate = std::function<double(const Outcome&)>;

// Observation of the opponent's behaviour in one session from `side`'s point
// of view. `opponent_utility` is u_o during training or an estimate û_o
// otherwise. Returns nullopt (unusable) when the opponent made no offer.
std::optional<OpponentObservation> opponent_observation(const SessionResult& result,
                                                        const BargainingProblem& problem,
                                                        Side side,
                                                        const UtilityEstimate& opponent_utility);

// Estimate built from the opponent's offers in the trace, as the Dynamic
// Agent's frequency model would hold it at the end of the session.
UtilityEstimate estimated_opponent_utility(const SessionResult& result,
                                           const BargainingProblem& problem, Side side);

// Mean and CoV (population std / mean, 0 when the mean is 0) per field.
// Throws InsufficientSamplesError with fewer than two observations.
OpponentFeatures aggregate(const std::vector<OpponentObservation>& observations);

// opponent id -> observations
using FeatureStore = std::map<std::string, std::vector<OpponentObservation>>;

void write_feature_store(const std::filesystem::path& path, const FeatureStore& store,
                         std::uint64_t seed);
FeatureStore read_feature_store(const std::filesystem::path& path);

// CSV with a header row: setting_id followed by the 14 feature names.
void write_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                       const std::vector<SettingFeatures>& rows);
std::string feature_csv(const std::vector<std::string>& ids,
                        const std::vector<SettingFeatures>& rows);

}  // namespace negoforge
