#include "negoforge/hydra.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <mutex>
#include <sstream>

#include "negoforge/errors.hpp"
#include "negoforge/json_io.hpp"
#include "negoforge/parallel.hpp"

namespace negoforge {

std::string strategy_id(std::size_t index) { return "theta" + std::to_string(index + 1); }

nlohmann::json portfolio_to_json(const Portfolio& portfolio) {
  Json arr = Json::array();
  for (const auto& e : portfolio) {
    arr.push_back({{"iteration", e.iteration}, {"seed", e.seed}, {"theta", to_json(e.config)}});
  }
  return arr;
}

Portfolio portfolio_from_json(const nlohmann::json& doc, const std::string& path) {
  const Json* arr = &doc;
  std::string base = path;
  if (doc.is_object()) {
    require_format(doc, path);
    arr = &require(doc, "portfolio", path);
    base = path + ".portfolio";
  }
  if (!arr->is_array() || arr->empty()) throw SchemaError(base + ": expected a non-empty array");
  Portfolio out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const std::string p = base + "[" + std::to_string(i) + "]";
    const Json& e = (*arr)[i];
    const Json& it = require(e, "iteration", p);
    const Json& sd = require(e, "seed", p);
    if (!it.is_number_unsigned() || it.get<std::size_t>() < 1) {
      throw SchemaError(p + ".iteration: expected a positive integer");
    }
    if (!sd.is_number_unsigned()) throw SchemaError(p + ".seed: expected an unsigned integer");
    out.push_back({configuration_from_json(require(e, "theta", p), p + ".theta"),
                   it.get<std::size_t>(), sd.get<std::uint64_t>()});
  }
  return out;
}

void write_portfolio(const std::filesystem::path& path, const Portfolio& portfolio,
                     std::uint64_t seed) {
  Json doc = artifact_header(seed);
  doc["portfolio"] = portfolio_to_json(portfolio);
  write_json_file(path, doc);
}

Portfolio read_portfolio(const std::filesystem::path& path) {
  return portfolio_from_json(read_json_file(path), path.string());
}

double modified_value(double base_r, double selected_r) { return std::max(base_r, selected_r); }

namespace {

struct ModifiedState {
  Metric base;
  Portfolio portfolio;
  PerformanceMatrix* matrix;
  SelectorModel selector;
  std::vector<SettingFeatures> features;
  std::uint64_t fill_seed;
  std::mutex mutex;
};

}  // namespace

Metric make_modified_metric(Metric base, const Portfolio& portfolio, PerformanceMatrix& matrix,
                            const SelectorModel& selector,
                            const std::vector<SettingFeatures>& features,
                            std::uint64_t fill_seed) {
  auto state = std::make_shared<ModifiedState>();
  state->base = std::move(base);
  state->portfolio = portfolio;
  state->matrix = &matrix;
  state->selector = selector;
  state->features = features;
  state->fill_seed = fill_seed;
  return [state](const AgentConfiguration& config, std::size_t setting, std::uint64_t seed) {
    const std::size_t chosen = state->selector.select(state->features.at(setting));
    double selected = 0.0;
    {
      std::lock_guard<std::mutex> lock(state->mutex);
      if (!state->matrix->has(chosen, setting)) {
        const double r = state->base(state->portfolio.at(chosen).config, setting,
                                     derive_seed(state->fill_seed, chosen, setting));
        state->matrix->add_run(chosen, setting, r);
      }
      selected = state->matrix->mean(chosen, setting);
    }
    return modified_value(state->base(config, setting, seed), selected);
  };
}

bool contributes(std::size_t strategy, const PerformanceMatrix& matrix) {
  matrix.require_complete();
  for (std::size_t s = 0; s < matrix.settings(); ++s) {
    const double mine = matrix.mean(strategy, s);
    bool strictly_best = true;
    for (std::size_t t = 0; t < matrix.strategies() && strictly_best; ++t) {
      if (t != strategy && !(mine > matrix.mean(t, s))) strictly_best = false;
    }
    if (strictly_best) return true;
  }
  return false;
}

BestRatioReport best_ratio_report(const PerformanceMatrix& matrix) {
  matrix.require_complete();
  const std::size_t k = matrix.strategies();
  BestRatioReport report;
  report.ratios.assign(k, std::vector<double>(k, 0.0));
  report.sums.assign(k, 0.0);
  const double n = static_cast<double>(matrix.settings());
  for (std::size_t s = 0; s < matrix.settings(); ++s) {
    const double best = matrix.mean(oracle(matrix, s), s);
    std::vector<std::size_t> tied;
    for (std::size_t t = 0; t < k; ++t) {
      if (matrix.mean(t, s) == best) tied.push_back(t);
    }
    for (std::size_t t : tied) report.ratios[t][tied.size() - 1] += 1.0 / n;
  }
  for (std::size_t t = 0; t < k; ++t) {
    for (double v : report.ratios[t]) report.sums[t] += v;
  }
  return report;
}

std::string best_ratio_markdown(const BestRatioReport& report,
                                const std::vector<std::string>& strategy_ids) {
  std::ostringstream out;
  const std::size_t k = report.sums.size();
  out << "| Strategy |";
  for (std::size_t j = 1; j <= k; ++j) out << " Best of " << j << " |";
  out << " Sum |\n|---|";
  for (std::size_t j = 0; j <= k; ++j) out << "---|";
  out << '\n';
  char buf[32];
  for (std::size_t t = 0; t < k; ++t) {
    out << "| " << strategy_ids.at(t) << " |";
    for (double v : report.ratios[t]) {
      std::snprintf(buf, sizeof buf, " %.3f |", v);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, " %.3f |\n", report.sums[t]);
    out << buf;
  }
  return out.str();
}

std::size_t evaluate_strategy(const AgentConfiguration& config, const std::string& id,
                              PerformanceMatrix& matrix, const Metric& metric,
                              std::size_t repetitions, int workers, std::uint64_t seed) {
  if (repetitions < 1) throw ConfigError("strategy evaluation needs at least one repetition");
  const std::size_t row = matrix.add_strategy(id);
  const std::size_t n = matrix.settings();
  const auto results = parallel_map<double>(
      n * repetitions,
      [&](std::size_t k) {
        const std::size_t s = k / repetitions;
        const std::size_t rep = k % repetitions;
        return metric(config, s, derive_seed(seed, s, rep));
      },
      workers);
  for (std::size_t k = 0; k < results.size(); ++k) matrix.add_run(row, k / repetitions, results[k]);
  return row;
}

std::vector<std::string> hydra_flags(const PerformanceMatrix& matrix) {
  std::vector<std::string> flags;
  for (std::size_t t = 0; t < matrix.strategies(); ++t) {
    if (matrix.strategies() > 1 && !contributes(t, matrix)) {
      flags.push_back(matrix.strategy_ids()[t] + " is never strictly best on any training setting");
    }
  }
  const std::size_t sb = single_best(matrix);
  if (sb != 0) {
    flags.push_back("single best strategy on the training set is " + matrix.strategy_ids()[sb] +
                    ", not " + matrix.strategy_ids()[0]);
  }
  double previous = -1.0;
  for (std::size_t k = 1; k <= matrix.strategies(); ++k) {
    const double oracle = oracle_performance(matrix.head(k));
    if (k > 1 && !(oracle > previous)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "oracle performance did not increase from size %zu (%.6f) to %zu (%.6f)",
                    k - 1, previous, k, oracle);
      flags.emplace_back(buf);
    }
    previous = oracle;
  }
  return flags;
}

HydraResult hydra(const ConfigurationSpace& space, const std::vector<std::string>& setting_ids,
                  const std::vector<SettingFeatures>& features, const Metric& base,
                  const HydraOptions& options, std::uint64_t seed,
                  const HydraCallback& on_iteration) {
  if (options.k_max < 1) throw ConfigError("hydra needs k_max >= 1");
  if (features.size() != setting_ids.size()) {
    throw ConfigError("setting features do not match the setting list");
  }
  FeatureMatrix feature_matrix;
  for (const auto& f : features) feature_matrix.append_row(f.values);

  HydraResult result;
  result.matrix = PerformanceMatrix(setting_ids);
  result.selector = SelectorModel::constant(1, 0);

  SmboOptions smbo_options = options.smbo;
  smbo_options.workers = options.workers;
  SelectorSearchSpec selector_spec = options.selector;
  selector_spec.workers = options.workers;

  for (std::size_t iteration = 1; iteration <= options.k_max; ++iteration) {
    const std::uint64_t smbo_seed = derive_seed(stream_seed(seed, "hydra-smbo"), iteration);
    PerformanceMatrix lookup = result.matrix;
    const Metric metric =
        iteration == 1 ? base
                       : make_modified_metric(base, result.portfolio, lookup, result.selector, features,
                                              derive_seed(stream_seed(seed, "hydra-fill"), iteration));
    const SmboResult run =
        smbo(space, setting_ids, feature_matrix, metric, smbo_options, smbo_seed);

    result.portfolio.push_back({run.incumbent, iteration, smbo_seed});
    evaluate_strategy(run.incumbent, strategy_id(result.portfolio.size() - 1), result.matrix, base,
                      options.repetitions, options.workers,
                      derive_seed(stream_seed(seed, "hydra-eval"), iteration));
    result.selector = fit_selector(result.matrix, features, selector_spec,
                                   derive_seed(stream_seed(seed, "hydra-selector"), iteration));

    HydraIteration info;
    info.iteration = iteration;
    info.sessions = run.history.size();
    info.oracle = oracle_performance(result.matrix);
    info.selector = selector_performance(result.selector, result.matrix, features);
    info.single_best = result.matrix.row_mean(single_best(result.matrix));
    result.iterations.push_back(info);

    result.single_best = single_best(result.matrix);
    result.contributes.clear();
    for (std::size_t t = 0; t < result.matrix.strategies(); ++t) {
      result.contributes.push_back(result.matrix.strategies() == 1 || contributes(t, result.matrix));
    }
    result.flags = hydra_flags(result.matrix);
    if (on_iteration) on_iteration(result, run);
  }
  return result;
}

}  // namespace negoforge
