#pragma once

// Sequential model-based configuration of AgentConfiguration over a fixed
// set of training settings. Budgets are session counts.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "negoforge/agent_config.hpp"
#include "negoforge/random_forest.hpp"

namespace negoforge {

struct RunRecord {
  std::size_t config_id = 0;
  std::size_t setting = 0;
  double r = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t ordinal = 0;
};

// Append-only log of (θ, setting, r) runs. Configurations are interned so a
// configuration evaluated twice keeps one id.
class RunHistory {
 public:
  RunHistory() = default;
  explicit RunHistory(std::vector<std::string> setting_ids);

  std::size_t intern(const AgentConfiguration& config);
  std::optional<std::size_t> find(const AgentConfiguration& config) const;
  const AgentConfiguration& config(std::size_t id) const { return configs_.at(id); }
  std::size_t config_count() const { return configs_.size(); }

  const std::vector<std::string>& setting_ids() const { return setting_ids_; }
  std::size_t setting_count() const { return setting_ids_.size(); }

  // Assigns the next ordinal and returns the stored record.
  const RunRecord& add(std::size_t config_id, std::size_t setting, double r, std::uint64_t seed);
  const std::vector<RunRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  std::size_t runs(std::size_t config_id, std::size_t setting) const;
  std::size_t total_runs(std::size_t config_id) const;
  // Sorted settings with at least one run of the configuration.
  std::vector<std::size_t> settings_of(std::size_t config_id) const;
  double cell_mean(std::size_t config_id, std::size_t setting) const;
  // Average over `settings` of the per-setting mean r.
  double mean_on(std::size_t config_id, const std::vector<std::size_t>& settings) const;
  double mean(std::size_t config_id) const { return mean_on(config_id, settings_of(config_id)); }

 private:
  struct Cell {
    double sum = 0.0;
    std::size_t count = 0;
  };

  std::vector<std::string> setting_ids_;
  std::vector<AgentConfiguration> configs_;
  std::map<std::array<double, kNumParameters>, std::size_t> index_;
  std::vector<RunRecord> records_;
  std::map<std::pair<std::size_t, std::size_t>, Cell> cells_;
};

// JSON lines: a header object {format, tool_version, seed, settings:[...]}
// followed by one record per line.
void write_run_history(const std::filesystem::path& path, const RunHistory& history,
                       std::uint64_t seed);
RunHistory read_run_history(const std::filesystem::path& path);
std::string run_history_jsonl(const RunHistory& history, std::uint64_t seed);

// r(θ, s) for one session with the given seed.
using Metric =
    std::function<double(const AgentConfiguration&, std::size_t setting, std::uint64_t seed)>;

// Random-forest surrogate over (encoded θ, setting features).
class Surrogate {
 public:
  Surrogate(const ConfigurationSpace& space, const FeatureMatrix& setting_features);

  void fit(const RunHistory& history, const ForestOptions& options, std::uint64_t seed);
  bool fitted() const { return forest_.fitted(); }

  // Prediction for θ on one setting.
  ForestPrediction predict(const AgentConfiguration& config, std::size_t setting) const;
  // Mean and variance averaged over the sampled settings.
  ForestPrediction predict_marginal(const AgentConfiguration& config) const;
  void set_marginal_settings(std::vector<std::size_t> settings) { marginal_ = std::move(settings); }

  // Gaussian expected improvement of the marginal prediction over `best`.
  double expected_improvement(const AgentConfiguration& config, double best) const;

  std::vector<double> row(const AgentConfiguration& config, std::size_t setting) const;

 private:
  const ConfigurationSpace* space_;
  const FeatureMatrix* features_;
  RegressionForest forest_;
  std::vector<std::size_t> marginal_;
};

double expected_improvement(double mean, double variance, double best);

struct SmboOptions {
  std::size_t budget = 500;          // total sessions in the history
  std::size_t challengers = 10;      // per iteration
  std::size_t intensify_budget = 20; // sessions per intensify call before it may stop
  std::size_t max_incumbent_runs = 100000;
  std::size_t ei_setting_sample = 10;
  std::size_t random_candidates = 200;
  std::size_t local_search_starts = 5;
  std::size_t local_search_steps = 20;
  ForestOptions forest{};
  int workers = 1;
};

// Up to `count` challengers: the best expected-improvement candidates from
// local search around the incumbent and random restarts, interleaved with
// uniform random configurations. An unfitted surrogate yields a pure random
// sample.
std::vector<AgentConfiguration> select_configurations(const Surrogate& model,
                                                      const AgentConfiguration& incumbent,
                                                      const ConfigurationSpace& space,
                                                      std::size_t count, const SmboOptions& options,
                                                      Rng& rng);

struct IntensifyStats {
  std::size_t sessions = 0;
  std::size_t promotions = 0;
};

// Runs challengers against the incumbent on a growing common set of
// settings, doubling the batch size each round. Promotes a challenger only
// once it has run on every setting of the incumbent and its mean there is
// strictly higher. Stops after the challenger list, after more than
// `intensify_budget` sessions once two challengers have been tried, or when
// the history reaches `global_budget`.
IntensifyStats intensify(const std::vector<AgentConfiguration>& challengers,
                         std::size_t& incumbent, RunHistory& history, const Metric& metric,
                         std::size_t intensify_budget, std::size_t global_budget,
                         std::size_t max_incumbent_runs, int workers, Rng& rng,
                         std::uint64_t run_seed);

struct TrajectoryPoint {
  std::size_t sessions = 0;
  std::size_t config_id = 0;
  double mean = 0.0;
  std::size_t settings = 0;
};

struct SmboResult {
  AgentConfiguration incumbent;
  std::size_t incumbent_id = 0;
  RunHistory history;
  std::vector<TrajectoryPoint> trajectory;
  std::size_t iterations = 0;
};

// `setting_features` holds one row per training setting (NaN allowed).
// Starting from `resume` continues an earlier run: its sessions count toward
// the budget and the incumbent is the configuration evaluated on the most
// settings (highest mean on ties).
SmboResult smbo(const ConfigurationSpace& space, const std::vector<std::string>& setting_ids,
                const FeatureMatrix& setting_features, const Metric& metric,
                const SmboOptions& options, std::uint64_t seed,
                std::optional<RunHistory> resume = std::nullopt);

}  // namespace negoforge
