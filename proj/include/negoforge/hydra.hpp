#pragma once

// Iterative portfolio construction: each round configures a new strategy
// under a metric that credits only improvement over the current
// portfolio-plus-selector, evaluates it on every training setting and refits
// the selector.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "negoforge/agent_config.hpp"
#include "negoforge/features.hpp"
#include "negoforge/performance_matrix.hpp"
#include "negoforge/selector.hpp"
#include "negoforge/smbo.hpp"

namespace negoforge {

struct PortfolioEntry {
  AgentConfiguration config;
  std::size_t iteration = 1;  // 1-based construction round
  std::uint64_t seed = 0;     // seed of the configurator run that produced it

  friend bool operator==(const PortfolioEntry&, const PortfolioEntry&) = default;
};

using Portfolio = std::vector<PortfolioEntry>;

std::string strategy_id(std::size_t index);  // "theta1", "theta2", ...

// {format, tool_version, seed, portfolio:[{iteration, seed, theta}]}; a bare
// array of entries is also accepted on read.
void write_portfolio(const std::filesystem::path& path, const Portfolio& portfolio,
                     std::uint64_t seed);
Portfolio read_portfolio(const std::filesystem::path& path);
nlohmann::json portfolio_to_json(const Portfolio& portfolio);
Portfolio portfolio_from_json(const nlohmann::json& doc, const std::string& path = "$");

double modified_value(double base_r, double selected_r);

// max(r(θ, s), r̄(AS(s), s)) with the selected strategy's score read from the
// matrix. A missing cell is filled by running the selected strategy once.
// Thread-safe.
Metric make_modified_metric(Metric base, const Portfolio& portfolio, PerformanceMatrix& matrix,
                            const SelectorModel& selector,
                            const std::vector<SettingFeatures>& features, std::uint64_t fill_seed);

// True iff the strategy is strictly better than every other row on at least
// one setting. Throws IncompleteMatrixError.
bool contributes(std::size_t strategy, const PerformanceMatrix& matrix);

// ratios[θ][j-1]: fraction of settings where θ belongs to the set of best
// strategies and that set has exactly j members. sums[θ] is the row total.
struct BestRatioReport {
  std::vector<std::vector<double>> ratios;
  std::vector<double> sums;
};
BestRatioReport best_ratio_report(const PerformanceMatrix& matrix);
std::string best_ratio_markdown(const BestRatioReport& report,
                                const std::vector<std::string>& strategy_ids);

struct HydraOptions {
  std::size_t k_max = 4;
  std::size_t repetitions = 10;  // sessions per setting for each portfolio member
  SmboOptions smbo{};
  SelectorSearchSpec selector{};
  int workers = 1;
};

struct HydraIteration {
  std::size_t iteration = 0;
  std::size_t sessions = 0;  // configurator sessions
  double oracle = 0.0;       // R(OR, S) after adding the member
  double selector = 0.0;     // R(AS, S)
  double single_best = 0.0;  // R(θ_sb, S)
};

struct HydraResult {
  Portfolio portfolio;
  PerformanceMatrix matrix;
  SelectorModel selector;
  std::vector<HydraIteration> iterations;
  std::vector<bool> contributes;
  std::size_t single_best = 0;
  std::vector<std::string> flags;
};

// Called after every round with the partial result and that round's
// configurator run, e.g. to persist artifacts.
using HydraCallback = std::function<void(const HydraResult&, const SmboResult&)>;

HydraResult hydra(const ConfigurationSpace& space, const std::vector<std::string>& setting_ids,
                  const std::vector<SettingFeatures>& features, const Metric& base,
                  const HydraOptions& options, std::uint64_t seed,
                  const HydraCallback& on_iteration = {});

// Evaluates `config` `repetitions` times on every setting and appends it as
// a new matrix row.
std::size_t evaluate_strategy(const AgentConfiguration& config, const std::string& id,
                              PerformanceMatrix& matrix, const Metric& metric,
                              std::size_t repetitions, int workers, std::uint64_t seed);

// Contribution, single-best and oracle-monotonicity checks over a finished
// portfolio; one message per problem found.
std::vector<std::string> hydra_flags(const PerformanceMatrix& matrix);

}  // namespace negoforge
