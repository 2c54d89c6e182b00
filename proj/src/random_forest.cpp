#include "negoforge/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "negoforge/errors.hpp"
#include "negoforge/parallel.hpp"

namespace negoforge {

void FeatureMatrix::append_row(std::span<const double> values) {
  if (rows == 0 && cols == 0) cols = values.size();
  if (values.size() != cols) throw ConfigError("feature row width mismatch");
  data.insert(data.end(), values.begin(), values.end());
  ++rows;
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

}  // namespace

void DecisionTree::fit(const FeatureMatrix& x, std::span<const double> y,
                       std::span<const std::size_t> rows, int n_classes,
                       const ForestOptions& options, std::uint64_t seed) {
  nodes_.clear();
  values_.clear();
  width_ = n_classes == 0 ? 1 : n_classes;
  if (rows.empty()) throw ConfigError("cannot fit a tree on zero rows");
  std::vector<std::size_t> work(rows.begin(), rows.end());
  Rng rng(seed);
  build(x, y, work, 0, work.size(), 0, n_classes, options, rng);
}

int DecisionTree::make_leaf(std::span<const double> y, const std::vector<std::size_t>& rows,
                            std::size_t begin, std::size_t end, int n_classes) {
  Node node;
  node.value = static_cast<int>(values_.size());
  const double n = static_cast<double>(end - begin);
  if (n_classes == 0) {
    double sum = 0.0;
    for (std::size_t k = begin; k < end; ++k) sum += y[rows[k]];
    values_.push_back(sum / n);
  } else {
    std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
    for (std::size_t k = begin; k < end; ++k) counts[static_cast<std::size_t>(y[rows[k]])] += 1.0;
    for (double c : counts) values_.push_back(c / n);
  }
  nodes_.push_back(node);
  return static_cast<int>(nodes_.size()) - 1;
}

int DecisionTree::build(const FeatureMatrix& x, std::span<const double> y,
                        std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
                        int depth, int n_classes, const ForestOptions& options, Rng& rng) {
  const std::size_t n = end - begin;
  const auto min_leaf = static_cast<std::size_t>(std::max(1, options.min_samples_leaf));

  // Parent impurity: SSE for regression, n * gini for classification.
  double parent = 0.0;
  std::vector<double> class_total(static_cast<std::size_t>(std::max(n_classes, 0)), 0.0);
  if (n_classes == 0) {
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      sum += y[rows[k]];
      sq += y[rows[k]] * y[rows[k]];
    }
    parent = sq - sum * sum / static_cast<double>(n);
  } else {
    for (std::size_t k = begin; k < end; ++k) class_total[static_cast<std::size_t>(y[rows[k]])] += 1;
    double s = 0.0;
    for (double c : class_total) s += c * c;
    parent = static_cast<double>(n) - s / static_cast<double>(n);
  }

  if (depth >= options.max_depth || n < static_cast<std::size_t>(options.min_samples_split) ||
      n < 2 * min_leaf || parent <= 1e-12) {
    return make_leaf(y, rows, begin, end, n_classes);
  }

  // Random column subset via partial Fisher-Yates.
  std::vector<int> columns(x.cols);
  std::iota(columns.begin(), columns.end(), 0);
  const auto mtry = static_cast<std::size_t>(std::clamp<long>(
      std::lround(options.max_features * static_cast<double>(x.cols)), 1L,
      static_cast<long>(x.cols)));
  for (std::size_t k = 0; k < mtry; ++k) {
    std::swap(columns[k], columns[k + uniform_index(rng, x.cols - k)]);
  }

  SplitChoice best;
  best.score = parent - 1e-12;
  std::vector<std::pair<double, double>> pairs(n);
  std::vector<double> left_counts(class_total.size());
  for (std::size_t c = 0; c < mtry; ++c) {
    const int f = columns[c];
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t r = rows[begin + k];
      pairs[k] = {x.at(r, static_cast<std::size_t>(f)), y[r]};
    }
    std::sort(pairs.begin(), pairs.end());
    if (pairs.front().first == pairs.back().first) continue;

    double lsum = 0.0;
    double lsq = 0.0;
    double tsum = 0.0;
    double tsq = 0.0;
    if (n_classes == 0) {
      for (const auto& p : pairs) {
        tsum += p.second;
        tsq += p.second * p.second;
      }
    } else {
      std::fill(left_counts.begin(), left_counts.end(), 0.0);
    }
    double lsq_counts = 0.0;  // Σ left_counts²
    for (std::size_t k = 1; k < n; ++k) {
      const double v = pairs[k - 1].second;
      if (n_classes == 0) {
        lsum += v;
        lsq += v * v;
      } else {
        auto& lc = left_counts[static_cast<std::size_t>(v)];
        lsq_counts += 2.0 * lc + 1.0;
        lc += 1.0;
      }
      if (k < min_leaf || n - k < min_leaf) continue;
      if (pairs[k - 1].first == pairs[k].first) continue;
      const double nl = static_cast<double>(k);
      const double nr = static_cast<double>(n - k);
      double score = 0.0;
      if (n_classes == 0) {
        const double rsum = tsum - lsum;
        const double rsq = tsq - lsq;
        score = (lsq - lsum * lsum / nl) + (rsq - rsum * rsum / nr);
      } else {
        double rsq_counts = 0.0;
        for (std::size_t cl = 0; cl < class_total.size(); ++cl) {
          const double rc = class_total[cl] - left_counts[cl];
          rsq_counts += rc * rc;
        }
        score = (nl - lsq_counts / nl) + (nr - rsq_counts / nr);
      }
      if (score < best.score) {
        const double lo = pairs[k - 1].first;
        const double hi = pairs[k].first;
        double thr = lo + (hi - lo) / 2.0;
        if (!(thr < hi)) thr = lo;
        best = {f, thr, score};
      }
    }
  }
  if (best.feature < 0) return make_leaf(y, rows, begin, end, n_classes);

  const auto col = static_cast<std::size_t>(best.feature);
  const auto mid_it = std::partition(
      rows.begin() + static_cast<std::ptrdiff_t>(begin), rows.begin() + static_cast<std::ptrdiff_t>(end),
      [&](std::size_t r) { return x.at(r, col) <= best.threshold; });
  const auto mid = static_cast<std::size_t>(mid_it - rows.begin());

  nodes_.push_back(Node{best.feature, best.threshold, -1, -1, 0});
  const int self = static_cast<int>(nodes_.size()) - 1;
  const int left = build(x, y, rows, begin, mid, depth + 1, n_classes, options, rng);
  const int right = build(x, y, rows, mid, end, depth + 1, n_classes, options, rng);
  nodes_[static_cast<std::size_t>(self)].left = left;
  nodes_[static_cast<std::size_t>(self)].right = right;
  return self;
}

std::span<const double> DecisionTree::predict(std::span<const double> row) const {
  std::size_t idx = 0;
  while (nodes_[idx].feature >= 0) {
    const Node& node = nodes_[idx];
    idx = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold
                                       ? node.left
                                       : node.right);
  }
  return {values_.data() + nodes_[idx].value, static_cast<std::size_t>(width_)};
}

int DecisionTree::depth() const {
  std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [idx, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes_[idx].feature >= 0) {
      stack.push_back({static_cast<std::size_t>(nodes_[idx].left), d + 1});
      stack.push_back({static_cast<std::size_t>(nodes_[idx].right), d + 1});
    }
  }
  return deepest;
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  }
  return {{"width", width_}, {"nodes", nodes}, {"values", values_}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& doc) {
  DecisionTree t;
  t.width_ = doc.at("width").get<int>();
  for (const auto& n : doc.at("nodes")) {
    t.nodes_.push_back(Node{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                            n.at(3).get<int>(), n.at(4).get<int>()});
  }
  t.values_ = doc.at("values").get<std::vector<double>>();
  const auto n_nodes = static_cast<int>(t.nodes_.size());
  for (const auto& n : t.nodes_) {
    const bool bad_leaf = n.feature < 0 && (n.value < 0 || static_cast<std::size_t>(n.value + t.width_) >
                                                                t.values_.size());
    const bool bad_split =
        n.feature >= 0 && (n.left <= 0 || n.left >= n_nodes || n.right <= 0 || n.right >= n_nodes);
    if (bad_leaf || bad_split || t.nodes_.empty()) throw SchemaError("malformed decision tree");
  }
  return t;
}

namespace {

std::vector<std::size_t> draw_rows(std::size_t n, bool bootstrap, Rng& rng) {
  std::vector<std::size_t> rows(n);
  if (bootstrap) {
    for (auto& r : rows) r = uniform_index(rng, n);
  } else {
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  return rows;
}

}  // namespace

void RegressionForest::fit(const FeatureMatrix& x, std::span<const double> y,
                           const ForestOptions& options, std::uint64_t seed) {
  if (x.rows == 0 || y.size() != x.rows) throw ConfigError("regression forest needs matching x/y");
  trees_ = parallel_map<DecisionTree>(
      static_cast<std::size_t>(std::max(1, options.trees)),
      [&](std::size_t t) {
        Rng rng(derive_seed(seed, t));
        const auto rows = draw_rows(x.rows, options.bootstrap, rng);
        DecisionTree tree;
        tree.fit(x, y, rows, 0, options, rng());
        return tree;
      },
      options.workers);
}

ForestPrediction RegressionForest::predict(std::span<const double> row) const {
  if (trees_.empty()) return {};
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& t : trees_) {
    const double v = t.predict(row)[0];
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(trees_.size());
  const double mean = sum / n;
  return {mean, std::max(0.0, sq / n - mean * mean)};
}

nlohmann::json RegressionForest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"trees", trees}};
}

RegressionForest RegressionForest::from_json(const nlohmann::json& doc) {
  RegressionForest f;
  for (const auto& t : doc.at("trees")) f.trees_.push_back(DecisionTree::from_json(t));
  return f;
}

void ClassificationForest::fit(const FeatureMatrix& x, std::span<const int> labels, int n_classes,
                               const ForestOptions& options, std::uint64_t seed) {
  if (x.rows == 0 || labels.size() != x.rows || n_classes < 1) {
    throw ConfigError("classification forest needs matching x/labels");
  }
  std::vector<double> y(labels.begin(), labels.end());
  for (double v : y) {
    if (v < 0 || v >= n_classes) throw ConfigError("class label out of range");
  }
  n_classes_ = n_classes;
  trees_ = parallel_map<DecisionTree>(
      static_cast<std::size_t>(std::max(1, options.trees)),
      [&](std::size_t t) {
        Rng rng(derive_seed(seed, t));
        const auto rows = draw_rows(x.rows, options.bootstrap, rng);
        DecisionTree tree;
        tree.fit(x, y, rows, n_classes, options, rng());
        return tree;
      },
      options.workers);
}

std::vector<double> ClassificationForest::probabilities(std::span<const double> row) const {
  std::vector<double> p(static_cast<std::size_t>(n_classes_), 0.0);
  for (const auto& t : trees_) {
    const auto leaf = t.predict(row);
    for (std::size_t c = 0; c < p.size(); ++c) p[c] += leaf[c];
  }
  for (double& v : p) v /= static_cast<double>(std::max<std::size_t>(1, trees_.size()));
  return p;
}

int ClassificationForest::predict(std::span<const double> row) const {
  const auto p = probabilities(row);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

nlohmann::json ClassificationForest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"classes", n_classes_}, {"trees", trees}};
}

ClassificationForest ClassificationForest::from_json(const nlohmann::json& doc) {
  ClassificationForest f;
  f.n_classes_ = doc.at("classes").get<int>();
  for (const auto& t : doc.at("trees")) f.trees_.push_back(DecisionTree::from_json(t));
  return f;
}

}  // namespace negoforge
