#include "negoforge/smbo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "negoforge/errors.hpp"
#include "negoforge/json_io.hpp"
#include "negoforge/parallel.hpp"
#include "negoforge/version.hpp"

namespace negoforge {

RunHistory::RunHistory(std::vector<std::string> setting_ids)
    : setting_ids_(std::move(setting_ids)) {}

std::size_t RunHistory::intern(const AgentConfiguration& config) {
  const auto key = ConfigurationSpace::to_values(config);
  const auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  configs_.push_back(config);
  index_.emplace(key, configs_.size() - 1);
  return configs_.size() - 1;
}

std::optional<std::size_t> RunHistory::find(const AgentConfiguration& config) const {
  const auto it = index_.find(ConfigurationSpace::to_values(config));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const RunRecord& RunHistory::add(std::size_t config_id, std::size_t setting, double r,
                                 std::uint64_t seed) {
  if (config_id >= configs_.size()) throw ConfigError("run for unknown configuration id");
  if (setting >= setting_ids_.size()) throw ConfigError("run for unknown setting index");
  records_.push_back({config_id, setting, r, seed, records_.size()});
  auto& cell = cells_[{config_id, setting}];
  cell.sum += r;
  ++cell.count;
  return records_.back();
}

std::size_t RunHistory::runs(std::size_t config_id, std::size_t setting) const {
  const auto it = cells_.find({config_id, setting});
  return it == cells_.end() ? 0 : it->second.count;
}

std::size_t RunHistory::total_runs(std::size_t config_id) const {
  std::size_t n = 0;
  for (auto it = cells_.lower_bound({config_id, 0}); it != cells_.end() && it->first.first == config_id;
       ++it) {
    n += it->second.count;
  }
  return n;
}

std::vector<std::size_t> RunHistory::settings_of(std::size_t config_id) const {
  std::vector<std::size_t> out;
  for (auto it = cells_.lower_bound({config_id, 0}); it != cells_.end() && it->first.first == config_id;
       ++it) {
    out.push_back(it->first.second);
  }
  return out;
}

double RunHistory::cell_mean(std::size_t config_id, std::size_t setting) const {
  const auto it = cells_.find({config_id, setting});
  if (it == cells_.end()) throw ConfigError("no runs for configuration on setting");
  return it->second.sum / static_cast<double>(it->second.count);
}

double RunHistory::mean_on(std::size_t config_id, const std::vector<std::size_t>& settings) const {
  if (settings.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t s : settings) sum += cell_mean(config_id, s);
  return sum / static_cast<double>(settings.size());
}

std::string run_history_jsonl(const RunHistory& history, std::uint64_t seed) {
  std::ostringstream out;
  Json header = artifact_header(seed);
  header["settings"] = history.setting_ids();
  out << header.dump() << '\n';
  for (const auto& rec : history.records()) {
    Json line = {{"ordinal", rec.ordinal},
                 {"config_id", rec.config_id},
                 {"theta", to_json(history.config(rec.config_id))},
                 {"setting", history.setting_ids()[rec.setting]},
                 {"r", rec.r},
                 {"seed", rec.seed}};
    out << line.dump() << '\n';
  }
  return out.str();
}

void write_run_history(const std::filesystem::path& path, const RunHistory& history,
                       std::uint64_t seed) {
  write_text_file(path, run_history_jsonl(history, seed));
}

RunHistory read_run_history(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  RunHistory history;
  std::map<std::string, std::size_t> setting_index;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    Json doc;
    try {
      doc = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw SchemaError(where + ": " + e.what());
    }
    if (line_no == 1) {
      require_format(doc, where);
      const Json& settings = require(doc, "settings", where);
      if (!settings.is_array()) throw SchemaError(where + ".settings: expected array");
      std::vector<std::string> ids;
      for (const auto& s : settings) {
        if (!s.is_string()) throw SchemaError(where + ".settings: expected strings");
        setting_index[s.get<std::string>()] = ids.size();
        ids.push_back(s.get<std::string>());
      }
      history = RunHistory(std::move(ids));
      continue;
    }
    const AgentConfiguration theta =
        configuration_from_json(require(doc, "theta", where), where + ".theta");
    const std::string setting = require_string(doc, "setting", where);
    const auto sit = setting_index.find(setting);
    if (sit == setting_index.end()) {
      throw SchemaError(where + ".setting: unknown setting '" + setting + "'");
    }
    const double r = require_number(doc, "r", where);
    const Json& seed = require(doc, "seed", where);
    if (!seed.is_number_unsigned()) throw SchemaError(where + ".seed: expected unsigned integer");
    const std::size_t id = history.intern(theta);
    const Json& cid = require(doc, "config_id", where);
    if (!cid.is_number_unsigned() || cid.get<std::size_t>() != id) {
      throw SchemaError(where + ".config_id: does not match the configuration's first appearance");
    }
    const Json& ord = require(doc, "ordinal", where);
    if (!ord.is_number_unsigned() || ord.get<std::size_t>() != history.size()) {
      throw SchemaError(where + ".ordinal: expected " + std::to_string(history.size()));
    }
    history.add(id, sit->second, r, seed.get<std::uint64_t>());
  }
  if (line_no == 0) throw SchemaError(path.string() + ": empty run history");
  return history;
}

Surrogate::Surrogate(const ConfigurationSpace& space, const FeatureMatrix& setting_features)
    : space_(&space), features_(&setting_features) {}

std::vector<double> Surrogate::row(const AgentConfiguration& config, std::size_t setting) const {
  std::vector<double> r = space_->encode(config);
  for (double v : features_->row(setting)) r.push_back(std::isnan(v) ? -1.0 : v);
  return r;
}

void Surrogate::fit(const RunHistory& history, const ForestOptions& options, std::uint64_t seed) {
  if (history.size() == 0) return;
  FeatureMatrix x;
  std::vector<double> y;
  y.reserve(history.size());
  for (const auto& rec : history.records()) {
    x.append_row(row(history.config(rec.config_id), rec.setting));
    y.push_back(rec.r);
  }
  forest_.fit(x, y, options, seed);
}

ForestPrediction Surrogate::predict(const AgentConfiguration& config, std::size_t setting) const {
  return forest_.predict(row(config, setting));
}

ForestPrediction Surrogate::predict_marginal(const AgentConfiguration& config) const {
  std::vector<std::size_t> all;
  const std::vector<std::size_t>* settings = &marginal_;
  if (marginal_.empty()) {
    all.resize(features_->rows);
    std::iota(all.begin(), all.end(), std::size_t{0});
    settings = &all;
  }
  ForestPrediction out;
  if (settings->empty()) return out;
  for (std::size_t s : *settings) {
    const auto p = predict(config, s);
    out.mean += p.mean;
    out.variance += p.variance;
  }
  const double n = static_cast<double>(settings->size());
  out.mean /= n;
  out.variance /= n;
  return out;
}

double expected_improvement(double mean, double variance, double best) {
  const double sigma = std::sqrt(std::max(0.0, variance));
  const double gain = mean - best;
  if (sigma < 1e-12) return std::max(0.0, gain);
  const double z = gain / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return gain * cdf + sigma * pdf;
}

double Surrogate::expected_improvement(const AgentConfiguration& config, double best) const {
  const auto p = predict_marginal(config);
  return negoforge::expected_improvement(p.mean, p.variance, best);
}

std::vector<AgentConfiguration> select_configurations(const Surrogate& model,
                                                      const AgentConfiguration& incumbent,
                                                      const ConfigurationSpace& space,
                                                      std::size_t count, const SmboOptions& options,
                                                      Rng& rng) {
  std::vector<AgentConfiguration> out;
  if (!model.fitted()) {
    for (std::size_t k = 0; k < count; ++k) out.push_back(space.sample(rng));
    return out;
  }

  const double best = model.predict_marginal(incumbent).mean;
  struct Scored {
    AgentConfiguration config;
    double ei;
  };
  std::vector<Scored> pool;
  auto score = [&](const AgentConfiguration& c) { return Scored{c, model.expected_improvement(c, best)}; };

  std::vector<Scored> random;
  for (std::size_t k = 0; k < options.random_candidates; ++k) random.push_back(score(space.sample(rng)));
  std::stable_sort(random.begin(), random.end(),
                   [](const Scored& a, const Scored& b) { return a.ei > b.ei; });

  std::vector<Scored> starts{score(incumbent)};
  for (std::size_t k = 0; k + 1 < options.local_search_starts && k < random.size(); ++k) {
    starts.push_back(random[k]);
  }
  for (Scored current : starts) {
    for (std::size_t step = 0; step < options.local_search_steps; ++step) {
      std::optional<Scored> better;
      for (const auto& nb : space.neighbors(current.config, rng)) {
        Scored s = score(nb);
        pool.push_back(s);
        if (s.ei > current.ei && (!better || s.ei > better->ei)) better = s;
      }
      if (!better) break;
      current = *better;
    }
    pool.push_back(current);
  }
  pool.insert(pool.end(), random.begin(), random.end());
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Scored& a, const Scored& b) { return a.ei > b.ei; });

  std::vector<AgentConfiguration> by_ei;
  const std::size_t want = (count + 1) / 2;
  for (const auto& s : pool) {
    if (by_ei.size() == want) break;
    if (s.config == incumbent) continue;
    if (std::find(by_ei.begin(), by_ei.end(), s.config) != by_ei.end()) continue;
    by_ei.push_back(s.config);
  }
  std::size_t ei_pos = 0;
  while (out.size() < count) {
    if (out.size() % 2 == 0 && ei_pos < by_ei.size()) {
      out.push_back(by_ei[ei_pos++]);
    } else {
      out.push_back(space.sample(rng));
    }
  }
  return out;
}

namespace {

// Runs `config_id` once on each setting of `settings` and appends the records
// in order. Returns the number of sessions executed.
std::size_t execute_runs(std::size_t config_id, const std::vector<std::size_t>& settings,
                         RunHistory& history, const Metric& metric, int workers,
                         std::uint64_t run_seed) {
  const std::size_t base = history.size();
  const AgentConfiguration config = history.config(config_id);
  std::vector<std::uint64_t> seeds(settings.size());
  for (std::size_t k = 0; k < settings.size(); ++k) seeds[k] = derive_seed(run_seed, base + k);
  const auto results = parallel_map<double>(
      settings.size(), [&](std::size_t k) { return metric(config, settings[k], seeds[k]); },
      workers);
  for (std::size_t k = 0; k < settings.size(); ++k) {
    history.add(config_id, settings[k], results[k], seeds[k]);
  }
  return settings.size();
}

}  // namespace

IntensifyStats intensify(const std::vector<AgentConfiguration>& challengers,
                         std::size_t& incumbent, RunHistory& history, const Metric& metric,
                         std::size_t intensify_budget, std::size_t global_budget,
                         std::size_t max_incumbent_runs, int workers, Rng& rng,
                         std::uint64_t run_seed) {
  IntensifyStats stats;
  const std::size_t n_settings = history.setting_count();
  auto remaining = [&] { return global_budget > history.size() ? global_budget - history.size() : 0; };

  for (std::size_t i = 0; i < challengers.size(); ++i) {
    if (remaining() == 0) break;

    // Incumbent on one of its least-run settings.
    if (history.total_runs(incumbent) < max_incumbent_runs) {
      std::size_t fewest = SIZE_MAX;
      std::vector<std::size_t> least;
      for (std::size_t s = 0; s < n_settings; ++s) {
        const std::size_t c = history.runs(incumbent, s);
        if (c < fewest) {
          fewest = c;
          least.clear();
        }
        if (c == fewest) least.push_back(s);
      }
      const std::size_t pick = least[uniform_index(rng, least.size())];
      stats.sessions += execute_runs(incumbent, {pick}, history, metric, workers, run_seed);
      if (remaining() == 0) break;
    }

    const std::size_t challenger = history.intern(challengers[i]);
    if (challenger == incumbent) continue;

    std::size_t n = 1;
    while (true) {
      const auto inc_settings = history.settings_of(incumbent);
      const auto ch_settings = history.settings_of(challenger);
      std::vector<std::size_t> missing;
      std::set_difference(inc_settings.begin(), inc_settings.end(), ch_settings.begin(),
                          ch_settings.end(), std::back_inserter(missing));
      std::shuffle(missing.begin(), missing.end(), rng);
      const std::size_t take = std::min({n, missing.size(), remaining()});
      std::vector<std::size_t> to_run(missing.begin(), missing.begin() + static_cast<std::ptrdiff_t>(take));
      std::sort(to_run.begin(), to_run.end());
      stats.sessions += execute_runs(challenger, to_run, history, metric, workers, run_seed);
      const bool missing_empty = take == missing.size();

      std::vector<std::size_t> common;
      const auto ch_now = history.settings_of(challenger);
      std::set_intersection(inc_settings.begin(), inc_settings.end(), ch_now.begin(), ch_now.end(),
                            std::back_inserter(common));
      if (common.empty()) break;
      const double ch_mean = history.mean_on(challenger, common);
      const double inc_mean = history.mean_on(incumbent, common);
      if (ch_mean < inc_mean) break;
      if (missing_empty) {
        if (ch_mean > inc_mean) {
          incumbent = challenger;
          ++stats.promotions;
        }
        break;
      }
      if (remaining() == 0) break;
      n = std::min(2 * n, n_settings);
    }

    if (stats.sessions > intensify_budget && i + 1 >= 2) break;
  }
  return stats;
}

namespace {

std::size_t resume_incumbent(const RunHistory& history) {
  std::size_t best = 0;
  std::size_t best_count = 0;
  double best_mean = -1.0;
  for (std::size_t id = 0; id < history.config_count(); ++id) {
    const std::size_t count = history.settings_of(id).size();
    if (count == 0) continue;
    const double mean = history.mean(id);
    if (count > best_count || (count == best_count && mean > best_mean)) {
      best = id;
      best_count = count;
      best_mean = mean;
    }
  }
  if (best_count == 0) throw ConfigError("resumed run history holds no runs");
  return best;
}

}  // namespace

SmboResult smbo(const ConfigurationSpace& space, const std::vector<std::string>& setting_ids,
                const FeatureMatrix& setting_features, const Metric& metric,
                const SmboOptions& options, std::uint64_t seed, std::optional<RunHistory> resume) {
  if (setting_ids.empty()) throw ConfigError("smbo needs at least one training setting");
  if (setting_features.rows != setting_ids.size()) {
    throw ConfigError("setting feature rows do not match the setting list");
  }
  if (options.budget < 1) throw ConfigError("smbo budget is too small for initialization");
  if (options.challengers < 1) throw ConfigError("smbo needs at least one challenger per iteration");

  Rng rng(stream_seed(seed, "smbo"));
  const std::uint64_t run_seed = stream_seed(seed, "smbo-runs");

  SmboResult result;
  std::size_t incumbent = 0;
  if (resume) {
    if (resume->setting_ids() != setting_ids) {
      throw ConfigError("resumed run history was recorded on a different setting list");
    }
    result.history = std::move(*resume);
    incumbent = resume_incumbent(result.history);
  } else {
    result.history = RunHistory(setting_ids);
    incumbent = result.history.intern(space.default_configuration());
    const std::size_t s = uniform_index(rng, setting_ids.size());
    execute_runs(incumbent, {s}, result.history, metric, options.workers, run_seed);
  }
  RunHistory& history = result.history;
  auto record = [&] {
    result.trajectory.push_back({history.size(), incumbent, history.mean(incumbent),
                                 history.settings_of(incumbent).size()});
  };
  record();

  Surrogate model(space, setting_features);
  while (history.size() < options.budget) {
    ForestOptions forest = options.forest;
    forest.workers = options.workers;
    model.fit(history, forest, derive_seed(stream_seed(seed, "smbo-model"), result.iterations));

    std::vector<std::size_t> sample(setting_ids.size());
    std::iota(sample.begin(), sample.end(), std::size_t{0});
    std::shuffle(sample.begin(), sample.end(), rng);
    sample.resize(std::min(sample.size(), std::max<std::size_t>(1, options.ei_setting_sample)));
    model.set_marginal_settings(sample);

    const auto challengers = select_configurations(model, history.config(incumbent), space,
                                                   options.challengers, options, rng);
    const std::size_t before = incumbent;
    const auto stats = intensify(challengers, incumbent, history, metric, options.intensify_budget,
                                 options.budget, options.max_incumbent_runs, options.workers, rng,
                                 run_seed);
    ++result.iterations;
    if (incumbent != before) record();
    if (stats.sessions == 0) break;
  }
  if (result.trajectory.back().sessions != history.size()) record();
  result.incumbent_id = incumbent;
  result.incumbent = history.config(incumbent);
  return result;
}

}  // namespace negoforge
