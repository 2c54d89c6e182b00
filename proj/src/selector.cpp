#include "negoforge/selector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "negoforge/errors.hpp"
#include "negoforge/json_io.hpp"
#include "negoforge/parallel.hpp"

namespace negoforge {

std::string to_string(SelectorMethod m) {
  switch (m) {
    case SelectorMethod::Constant:
      return "constant";
    case SelectorMethod::NearestNeighbor:
      return "nearest-neighbor";
    case SelectorMethod::ForestClassifier:
      return "random-forest-classifier";
    case SelectorMethod::ForestRegression:
      return "per-strategy-regression";
  }
  return "constant";
}

SelectorMethod selector_method_from_string(const std::string& s) {
  for (auto m : {SelectorMethod::Constant, SelectorMethod::NearestNeighbor,
                 SelectorMethod::ForestClassifier, SelectorMethod::ForestRegression}) {
    if (to_string(m) == s) return m;
  }
  throw SchemaError("unknown selector method '" + s + "'");
}

std::vector<SelectorCandidate> SelectorSearchSpec::default_candidates() {
  std::vector<SelectorCandidate> out;
  for (int k : {1, 3, 5, 7}) out.push_back({SelectorMethod::NearestNeighbor, k});
  for (int t : {25, 50, 100}) out.push_back({SelectorMethod::ForestClassifier, t});
  for (int t : {25, 50, 100}) out.push_back({SelectorMethod::ForestRegression, t});
  return out;
}

namespace {

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

bool usable(const SettingFeatures& f) {
  if (!f.opponent_known) return false;
  return std::all_of(f.values.begin(), f.values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

SelectorModel SelectorModel::constant(std::size_t strategies, std::size_t index) {
  if (index >= strategies) throw ConfigError("constant selector index outside the portfolio");
  SelectorModel m;
  m.method_ = SelectorMethod::Constant;
  m.fallback_ = index;
  m.strategies_ = strategies;
  return m;
}

SelectorModel SelectorModel::train(const SelectorCandidate& candidate,
                                   const PerformanceMatrix& matrix,
                                   const std::vector<SettingFeatures>& features,
                                   const std::vector<std::size_t>& settings, std::size_t fallback,
                                   const ForestOptions& forest, std::uint64_t seed) {
  const std::size_t strategies = matrix.strategies();
  if (candidate.method == SelectorMethod::Constant || settings.empty()) {
    return constant(strategies, fallback);
  }
  SelectorModel m;
  m.method_ = candidate.method;
  m.param_ = candidate.param;
  m.fallback_ = fallback;
  m.strategies_ = strategies;

  m.center_.assign(kNumSettingFeatures, 0.0);
  m.scale_.assign(kNumSettingFeatures, 0.0);
  const double n = static_cast<double>(settings.size());
  for (std::size_t s : settings) {
    for (std::size_t c = 0; c < kNumSettingFeatures; ++c) m.center_[c] += features[s].values[c];
  }
  for (double& v : m.center_) v /= n;
  for (std::size_t s : settings) {
    for (std::size_t c = 0; c < kNumSettingFeatures; ++c) {
      const double d = features[s].values[c] - m.center_[c];
      m.scale_[c] += d * d;
    }
  }
  for (double& v : m.scale_) {
    v = std::sqrt(v / n);
    if (v < 1e-12) v = 1.0;
  }

  FeatureMatrix x;
  for (std::size_t s : settings) x.append_row(m.standardize(features[s].values));

  ForestOptions opts = forest;
  opts.trees = std::max(1, candidate.param);
  opts.workers = 1;
  switch (candidate.method) {
    case SelectorMethod::NearestNeighbor:
      for (std::size_t k = 0; k < settings.size(); ++k) {
        m.train_x_.emplace_back(x.row(k).begin(), x.row(k).end());
        std::vector<double> perf(strategies);
        for (std::size_t t = 0; t < strategies; ++t) perf[t] = matrix.mean(t, settings[k]);
        m.train_perf_.push_back(std::move(perf));
      }
      break;
    case SelectorMethod::ForestClassifier: {
      std::vector<int> labels;
      for (std::size_t s : settings) labels.push_back(static_cast<int>(oracle(matrix, s)));
      m.classifier_.fit(x, labels, static_cast<int>(strategies), opts, seed);
      break;
    }
    case SelectorMethod::ForestRegression:
      for (std::size_t t = 0; t < strategies; ++t) {
        std::vector<double> y;
        for (std::size_t s : settings) y.push_back(matrix.mean(t, s));
        RegressionForest f;
        f.fit(x, y, opts, derive_seed(seed, t));
        m.regressors_.push_back(std::move(f));
      }
      break;
    case SelectorMethod::Constant:
      break;
  }
  return m;
}

std::vector<double> SelectorModel::standardize(std::span<const double> values) const {
  std::vector<double> out(values.size());
  for (std::size_t c = 0; c < values.size(); ++c) out[c] = (values[c] - center_[c]) / scale_[c];
  return out;
}

std::size_t SelectorModel::decide(std::span<const double> values) const {
  const auto z = standardize(values);
  switch (method_) {
    case SelectorMethod::NearestNeighbor: {
      std::vector<std::pair<double, std::size_t>> dist;
      for (std::size_t k = 0; k < train_x_.size(); ++k) {
        double d = 0.0;
        for (std::size_t c = 0; c < z.size(); ++c) d += (z[c] - train_x_[k][c]) * (z[c] - train_x_[k][c]);
        dist.emplace_back(d, k);
      }
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, param_)), dist.size());
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      std::vector<double> perf(strategies_, 0.0);
      for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t t = 0; t < strategies_; ++t) perf[t] += train_perf_[dist[j].second][t];
      }
      return argmax_lowest(perf);
    }
    case SelectorMethod::ForestClassifier:
      return static_cast<std::size_t>(classifier_.predict(z));
    case SelectorMethod::ForestRegression: {
      std::vector<double> pred;
      for (const auto& f : regressors_) pred.push_back(f.predict(z).mean);
      return argmax_lowest(pred);
    }
    case SelectorMethod::Constant:
      break;
  }
  return fallback_;
}

std::size_t SelectorModel::select(const SettingFeatures& features) const {
  if (method_ == SelectorMethod::Constant || !usable(features)) return fallback_;
  return decide(features.values);
}

std::size_t SelectorModel::select(std::span<const double> values) const {
  if (values.size() != kNumSettingFeatures) {
    throw ConfigError("selector input needs " + std::to_string(kNumSettingFeatures) +
                      " features, got " + std::to_string(values.size()));
  }
  for (std::size_t c = 0; c < kNumProblemFeatures; ++c) {
    if (!std::isfinite(values[c])) throw ConfigError("selector input has a non-finite problem feature");
  }
  SettingFeatures f;
  std::copy(values.begin(), values.end(), f.values.begin());
  f.opponent_known = std::all_of(values.begin() + kNumProblemFeatures, values.end(),
                                 [](double v) { return std::isfinite(v); });
  return select(f);
}

nlohmann::json SelectorModel::to_json() const {
  Json doc = {{"method", to_string(method_)},
              {"param", param_},
              {"fallback", fallback_},
              {"strategies", strategies_},
              {"cv_score", cv_score_}};
  if (method_ == SelectorMethod::Constant) return doc;
  doc["center"] = center_;
  doc["scale"] = scale_;
  doc["feature_names"] = feature_names();
  if (method_ == SelectorMethod::NearestNeighbor) {
    doc["train_x"] = train_x_;
    doc["train_perf"] = train_perf_;
  } else if (method_ == SelectorMethod::ForestClassifier) {
    doc["classifier"] = classifier_.to_json();
  } else {
    Json forests = Json::array();
    for (const auto& f : regressors_) forests.push_back(f.to_json());
    doc["regressors"] = forests;
  }
  return doc;
}

SelectorModel SelectorModel::from_json(const nlohmann::json& doc, const std::string& path) {
  SelectorModel m;
  try {
    m.method_ = selector_method_from_string(require_string(doc, "method", path));
    m.param_ = require(doc, "param", path).get<int>();
    m.fallback_ = require(doc, "fallback", path).get<std::size_t>();
    m.strategies_ = require(doc, "strategies", path).get<std::size_t>();
    m.cv_score_ = require_number(doc, "cv_score", path);
    if (m.strategies_ == 0 || m.fallback_ >= m.strategies_) {
      throw SchemaError(path + ".fallback: outside the portfolio");
    }
    if (m.method_ == SelectorMethod::Constant) return m;
    m.center_ = require(doc, "center", path).get<std::vector<double>>();
    m.scale_ = require(doc, "scale", path).get<std::vector<double>>();
    if (m.center_.size() != kNumSettingFeatures || m.scale_.size() != kNumSettingFeatures) {
      throw SchemaError(path + ".center/scale: expected " + std::to_string(kNumSettingFeatures) +
                        " entries");
    }
    if (m.method_ == SelectorMethod::NearestNeighbor) {
      m.train_x_ = require(doc, "train_x", path).get<std::vector<std::vector<double>>>();
      m.train_perf_ = require(doc, "train_perf", path).get<std::vector<std::vector<double>>>();
      if (m.train_x_.empty() || m.train_x_.size() != m.train_perf_.size()) {
        throw SchemaError(path + ".train_x: size mismatch with train_perf");
      }
      for (std::size_t k = 0; k < m.train_x_.size(); ++k) {
        if (m.train_x_[k].size() != kNumSettingFeatures || m.train_perf_[k].size() != m.strategies_) {
          throw SchemaError(path + ".train_x[" + std::to_string(k) + "]: wrong width");
        }
      }
    } else if (m.method_ == SelectorMethod::ForestClassifier) {
      m.classifier_ = ClassificationForest::from_json(require(doc, "classifier", path));
      if (static_cast<std::size_t>(m.classifier_.classes()) != m.strategies_) {
        throw SchemaError(path + ".classifier: class count differs from the portfolio size");
      }
    } else {
      for (const auto& f : require(doc, "regressors", path)) {
        m.regressors_.push_back(RegressionForest::from_json(f));
      }
      if (m.regressors_.size() != m.strategies_) {
        throw SchemaError(path + ".regressors: expected one forest per strategy");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return m;
}

std::size_t oracle(const PerformanceMatrix& matrix, std::size_t setting) {
  std::size_t best = 0;
  for (std::size_t t = 1; t < matrix.strategies(); ++t) {
    if (matrix.mean(t, setting) > matrix.mean(best, setting)) best = t;
  }
  return best;
}

std::size_t single_best(const PerformanceMatrix& matrix) {
  matrix.require_complete();
  std::size_t best = 0;
  double best_mean = matrix.row_mean(0);
  for (std::size_t t = 1; t < matrix.strategies(); ++t) {
    const double m = matrix.row_mean(t);
    if (m > best_mean) {
      best = t;
      best_mean = m;
    }
  }
  return best;
}

double oracle_performance(const PerformanceMatrix& matrix) {
  matrix.require_complete();
  double sum = 0.0;
  for (std::size_t s = 0; s < matrix.settings(); ++s) sum += matrix.mean(oracle(matrix, s), s);
  return sum / static_cast<double>(matrix.settings());
}

double selector_performance(const SelectorModel& model, const PerformanceMatrix& matrix,
                            const std::vector<SettingFeatures>& features) {
  matrix.require_complete();
  if (features.size() != matrix.settings()) {
    throw ConfigError("feature rows do not match the matrix settings");
  }
  double sum = 0.0;
  for (std::size_t s = 0; s < matrix.settings(); ++s) sum += matrix.mean(model.select(features[s]), s);
  return sum / static_cast<double>(matrix.settings());
}

double normalized_score(double as, double sb, double oracle) {
  if (oracle == sb) return 1.0;
  return (as - sb) / (oracle - sb);
}

double normalized_score(const SelectorModel& model, const PerformanceMatrix& matrix,
                        const std::vector<SettingFeatures>& features) {
  const double as = selector_performance(model, matrix, features);
  const double sb = matrix.row_mean(single_best(matrix));
  return normalized_score(as, sb, oracle_performance(matrix));
}

SelectorModel fit_selector(const PerformanceMatrix& matrix,
                           const std::vector<SettingFeatures>& features,
                           const SelectorSearchSpec& spec, std::uint64_t seed) {
  matrix.require_complete();
  const std::size_t n = matrix.settings();
  if (features.size() != n) throw ConfigError("feature rows do not match the matrix settings");
  std::vector<std::string> missing;
  for (std::size_t s = 0; s < n; ++s) {
    if (!usable(features[s])) missing.push_back(matrix.setting_ids()[s]);
  }
  if (!missing.empty()) {
    std::string msg = "missing features for settings:";
    for (const auto& id : missing) msg += " " + id;
    throw ConfigError(msg);
  }
  if (matrix.strategies() == 1 || spec.candidates.empty()) return SelectorModel::constant(matrix.strategies(), 0);

  const std::size_t folds = std::min<std::size_t>(static_cast<std::size_t>(std::max(spec.folds, 2)), n);
  if (folds < 2) return SelectorModel::constant(matrix.strategies(), 0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(stream_seed(seed, "selector-cv"));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t k = 0; k < n; ++k) fold_of[order[k]] = k % folds;

  const std::uint64_t fit_seed = stream_seed(seed, "selector-fit");
  const auto scores = parallel_map<double>(
      spec.candidates.size(),
      [&](std::size_t c) {
        double sum = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
          std::vector<std::size_t> train;
          std::vector<std::size_t> held;
          for (std::size_t s = 0; s < n; ++s) (fold_of[s] == f ? held : train).push_back(s);
          const auto model = SelectorModel::train(spec.candidates[c], matrix, features, train, 0,
                                                  spec.forest, derive_seed(fit_seed, c, f));
          for (std::size_t s : held) sum += matrix.mean(model.select(features[s]), s);
        }
        return sum / static_cast<double>(n);
      },
      spec.workers);

  const std::size_t best = argmax_lowest(scores);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  SelectorModel model = SelectorModel::train(spec.candidates[best], matrix, features, all, 0,
                                             spec.forest, derive_seed(fit_seed, best, folds));
  model.set_cv_score(scores[best]);
  if (selector_performance(model, matrix, features) < matrix.row_mean(0)) {
    SelectorModel fallback = SelectorModel::constant(matrix.strategies(), 0);
    fallback.set_cv_score(scores[best]);
    return fallback;
  }
  return model;
}

void write_selector(const std::filesystem::path& path, const SelectorModel& model,
                    std::uint64_t seed) {
  Json doc = artifact_header(seed);
  doc["selector"] = model.to_json();
  write_json_file(path, doc);
}

SelectorModel read_selector(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  require_format(doc, path.string());
  return SelectorModel::from_json(require(doc, "selector", path.string()), path.string() + ".selector");
}

}  // namespace negoforge
