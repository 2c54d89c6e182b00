#pragma once

// Per-setting strategy selection over a portfolio: a cross-validated search
// over nearest-neighbour, random-forest classification and per-strategy
// regression selectors, plus the oracle and single-best baselines.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "negoforge/features.hpp"
#include "negoforge/performance_matrix.hpp"
#include "negoforge/random_forest.hpp"

namespace negoforge {

enum class SelectorMethod { Constant, NearestNeighbor, ForestClassifier, ForestRegression };

std::string to_string(SelectorMethod m);
SelectorMethod selector_method_from_string(const std::string& s);

struct SelectorCandidate {
  SelectorMethod method = SelectorMethod::Constant;
  int param = 0;  // k for nearest-neighbour, tree count for forests
};

struct SelectorSearchSpec {
  std::vector<SelectorCandidate> candidates = default_candidates();
  int folds = 5;
  ForestOptions forest{};
  int workers = 1;

  static std::vector<SelectorCandidate> default_candidates();
};

class SelectorModel {
 public:
  static SelectorModel constant(std::size_t strategies, std::size_t index = 0);

  // Fits one candidate on the given rows of the matrix. `fallback` is the
  // index returned for inputs with a missing opponent block.
  static SelectorModel train(const SelectorCandidate& candidate, const PerformanceMatrix& matrix,
                             const std::vector<SettingFeatures>& features,
                             const std::vector<std::size_t>& settings, std::size_t fallback,
                             const ForestOptions& forest, std::uint64_t seed);

  // Missing or non-finite opponent features -> fallback.
  std::size_t select(const SettingFeatures& features) const;
  // Throws ConfigError unless the vector has 14 entries.
  std::size_t select(std::span<const double> values) const;

  SelectorMethod method() const { return method_; }
  int param() const { return param_; }
  std::size_t fallback() const { return fallback_; }
  std::size_t strategies() const { return strategies_; }
  double cv_score() const { return cv_score_; }
  void set_cv_score(double v) { cv_score_ = v; }

  nlohmann::json to_json() const;
  static SelectorModel from_json(const nlohmann::json& doc, const std::string& path = "$");

 private:
  std::vector<double> standardize(std::span<const double> values) const;
  std::size_t decide(std::span<const double> values) const;

  SelectorMethod method_ = SelectorMethod::Constant;
  int param_ = 0;
  std::size_t fallback_ = 0;
  std::size_t strategies_ = 1;
  double cv_score_ = 0.0;
  std::vector<double> center_;
  std::vector<double> scale_;
  // nearest-neighbour: standardized training rows and their performance rows
  std::vector<std::vector<double>> train_x_;
  std::vector<std::vector<double>> train_perf_;
  ClassificationForest classifier_;
  std::vector<RegressionForest> regressors_;
};

// Cross-validated search over spec.candidates; the winner is refitted on all
// settings. Falls back to the constant θ₁ (index 0) selector when it does not
// reach R(θ₁, S) on the training matrix. Throws ConfigError naming settings
// whose features are missing.
SelectorModel fit_selector(const PerformanceMatrix& matrix,
                           const std::vector<SettingFeatures>& features,
                           const SelectorSearchSpec& spec, std::uint64_t seed);

// argmax_θ r̄(θ, s), lowest index on ties.
std::size_t oracle(const PerformanceMatrix& matrix, std::size_t setting);
// argmax_θ R(θ, S), lowest index on ties.
std::size_t single_best(const PerformanceMatrix& matrix);

double oracle_performance(const PerformanceMatrix& matrix);
double selector_performance(const SelectorModel& model, const PerformanceMatrix& matrix,
                            const std::vector<SettingFeatures>& features);
// (as - sb) / (oracle - sb); 1.0 when oracle == sb.
double normalized_score(double as, double sb, double oracle);
double normalized_score(const SelectorModel& model, const PerformanceMatrix& matrix,
                        const std::vector<SettingFeatures>& features);

void write_selector(const std::filesystem::path& path, const SelectorModel& model,
                    std::uint64_t seed);
SelectorModel read_selector(const std::filesystem::path& path);

}  // namespace negoforge
