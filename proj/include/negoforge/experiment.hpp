#pragma once

// Experiment configuration, artifact layout and the pipeline stages behind
// the command-line subcommands. Every stage reads its inputs from the output
// directory and writes versioned artifacts back into it.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "negoforge/features.hpp"
#include "negoforge/hydra.hpp"
#include "negoforge/opponents.hpp"
#include "negoforge/problem_gen.hpp"
#include "negoforge/smbo.hpp"
#include "negoforge/tournament.hpp"
#include "negoforge/verification.hpp"

namespace negoforge {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out = "negoforge-out";
  int workers = 1;

  int train_problems = 20;  // domains; each is played from both sides
  int test_problems = 10;
  ProblemGenSpec generator{};
  int max_rounds = 100;
  int feature_sessions = 10;  // default-strategy sessions per training opponent

  std::size_t smbo_budget = 300;
  std::size_t smbo_challengers = 10;
  std::size_t smbo_intensify_budget = 20;
  int surrogate_trees = 50;

  std::size_t hydra_k = 3;
  std::size_t hydra_repetitions = 10;
  int selector_folds = 5;

  int tournament_repetitions = 3;
  bool warmup = false;
};

// Throws SchemaError (path + field) for malformed documents and ConfigError
// for non-positive budgets. Missing keys keep their defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, const std::string& path = "$");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

struct ArtifactPaths {
  std::filesystem::path train_problems;
  std::filesystem::path test_problems;
  std::filesystem::path roster;
  std::filesystem::path feature_store;
  std::filesystem::path feature_csv;
  std::filesystem::path history_dir;
  std::filesystem::path configure_result;
  std::filesystem::path portfolio;
  std::filesystem::path matrix;
  std::filesystem::path selector;
  std::filesystem::path hydra_report;
  std::filesystem::path report_md;
  std::filesystem::path sessions_csv;
  std::filesystem::path plot_csv;
  std::filesystem::path baseline_md;
  std::filesystem::path baseline_sessions_csv;
  std::filesystem::path tournament_json;
  std::filesystem::path summary;
};

ArtifactPaths artifact_paths(const std::filesystem::path& out);

// Training settings: every (training problem, side) paired with every
// training opponent.
struct TrainingSet {
  std::vector<BargainingProblem> domains;
  std::vector<OpponentSpec> opponents;
  std::vector<std::string> ids;
  std::vector<SettingFeatures> features;
  Metric metric;  // utility of DA(θ) in one session on a setting
};

void stage_gen_problems(const ExperimentConfig& config);
void stage_gen_roster(const ExperimentConfig& config);
void stage_extract_features(const ExperimentConfig& config);
SmboResult stage_configure(const ExperimentConfig& config);
HydraResult stage_hydra(const ExperimentConfig& config);
SelectorModel stage_fit_selector(const ExperimentConfig& config);

struct TournamentOutcome {
  TournamentReport selector;
  TournamentReport baseline;
  std::vector<MetricDelta> deltas;
  std::string hash;
};
TournamentOutcome stage_tournament(const ExperimentConfig& config);
std::string stage_report(const ExperimentConfig& config);

// Invariant suite plus checks of whatever artifacts exist in the output
// directory (schema, matrix cells, round-trip stability).
std::vector<CheckResult> stage_verify(const ExperimentConfig& config);

TournamentOutcome run_pipeline(const ExperimentConfig& config);

// Building blocks shared by the stages.
std::vector<BargainingProblem> read_problem_dir(const std::filesystem::path& dir);
TrainingSet load_training_set(const ExperimentConfig& config);
FeatureStore collect_training_observations(const std::vector<BargainingProblem>& domains,
                                           const std::vector<OpponentSpec>& opponents,
                                           const ExperimentConfig& config);

}  // namespace negoforge
