#pragma once

// CART-based random forests: a regressor used as the configurator's
// surrogate (mean and between-tree variance) and a classifier used by the
// strategy selector. Trees are grown independently from per-tree seeds, so
// fitting on several threads gives the same forest as fitting serially.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "negoforge/random.hpp"

namespace negoforge {

// Dense row-major matrix of doubles.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  void append_row(std::span<const double> values);
};

struct ForestOptions {
  int trees = 50;
  int max_depth = 20;
  int min_samples_split = 3;
  int min_samples_leaf = 1;
  double max_features = 0.5;  // fraction of columns tried per split
  bool bootstrap = true;
  int workers = 1;
};

class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int value = 0;  // offset into values_ for leaves
  };

  // Regression when n_classes == 0 (targets are real values), otherwise
  // Gini classification over labels 0..n_classes-1.
  void fit(const FeatureMatrix& x, std::span<const double> y, std::span<const std::size_t> rows,
           int n_classes, const ForestOptions& options, std::uint64_t seed);

  // Leaf payload: 1 value (regression) or n_classes probabilities.
  std::span<const double> predict(std::span<const double> row) const;

  std::size_t node_count() const { return nodes_.size(); }
  int depth() const;

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& doc);

 private:
  int build(const FeatureMatrix& x, std::span<const double> y, std::vector<std::size_t>& rows,
            std::size_t begin, std::size_t end, int depth, int n_classes,
            const ForestOptions& options, Rng& rng);
  int make_leaf(std::span<const double> y, const std::vector<std::size_t>& rows,
                std::size_t begin, std::size_t end, int n_classes);

  std::vector<Node> nodes_;
  std::vector<double> values_;
  int width_ = 1;
};

struct ForestPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

class RegressionForest {
 public:
  void fit(const FeatureMatrix& x, std::span<const double> y, const ForestOptions& options,
           std::uint64_t seed);
  bool fitted() const { return !trees_.empty(); }
  ForestPrediction predict(std::span<const double> row) const;
  std::size_t size() const { return trees_.size(); }

  nlohmann::json to_json() const;
  static RegressionForest from_json(const nlohmann::json& doc);

 private:
  std::vector<DecisionTree> trees_;
};

class ClassificationForest {
 public:
  void fit(const FeatureMatrix& x, std::span<const int> labels, int n_classes,
           const ForestOptions& options, std::uint64_t seed);
  bool fitted() const { return !trees_.empty(); }
  std::vector<double> probabilities(std::span<const double> row) const;
  // argmax of the averaged class probabilities, lowest class on ties.
  int predict(std::span<const double> row) const;
  int classes() const { return n_classes_; }

  nlohmann::json to_json() const;
  static ClassificationForest from_json(const nlohmann::json& doc);

 private:
  std::vector<DecisionTree> trees_;
  int n_classes_ = 0;
};

}  // namespace negoforge
