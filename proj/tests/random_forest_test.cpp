#include <gtest/gtest.h>

#include <cmath>

#include "negoforge/random.hpp"
#include "negoforge/random_forest.hpp"

using namespace negoforge;

namespace {

struct Data {
  FeatureMatrix x;
  std::vector<double> y;
  std::vector<int> labels;
};

// y = 1 when x0 > 0.5 else 0, plus an irrelevant second column.
Data step_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    const double row[2] = {uniform01(rng), uniform01(rng)};
    d.x.append_row(row);
    d.y.push_back(row[0] > 0.5 ? 1.0 : 0.0);
    d.labels.push_back(row[0] > 0.5 ? 1 : 0);
  }
  return d;
}

}  // namespace

TEST(DecisionTree, FitsAStepExactly) {
  const auto d = step_data(200, 1);
  std::vector<std::size_t> rows(200);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  ForestOptions o;
  o.max_features = 1.0;
  DecisionTree t;
  t.fit(d.x, d.y, rows, 0, o, 7);
  for (std::size_t i = 0; i < 200; ++i) EXPECT_DOUBLE_EQ(t.predict(d.x.row(i))[0], d.y[i]);
  EXPECT_EQ(t.depth(), 1);
  EXPECT_EQ(t.node_count(), 3u);
}

TEST(DecisionTree, ConstantTargetIsALeaf) {
  FeatureMatrix x;
  std::vector<double> y;
  for (int i = 0; i < 10; ++i) {
    const double r[1] = {static_cast<double>(i)};
    x.append_row(r);
    y.push_back(0.25);
  }
  std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  DecisionTree t;
  t.fit(x, y, rows, 0, ForestOptions{}, 1);
  EXPECT_EQ(t.node_count(), 1u);
  const double q[1] = {3.0};
  EXPECT_DOUBLE_EQ(t.predict(q)[0], 0.25);
}

TEST(DecisionTree, MinSamplesLeafIsRespected) {
  const auto d = step_data(50, 2);
  std::vector<std::size_t> rows(50);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  ForestOptions o;
  o.min_samples_leaf = 30;
  DecisionTree t;
  t.fit(d.x, d.y, rows, 0, o, 3);
  EXPECT_EQ(t.node_count(), 1u);
}

TEST(RegressionForest, MeanAndSpreadAcrossTrees) {
  const auto d = step_data(300, 4);
  RegressionForest f;
  ForestOptions o;
  o.trees = 30;
  f.fit(d.x, d.y, o, 5);
  ASSERT_EQ(f.size(), 30u);
  const double lo[2] = {0.1, 0.5}, hi[2] = {0.9, 0.5}, edge[2] = {0.5, 0.5};
  EXPECT_NEAR(f.predict(lo).mean, 0.0, 0.05);
  EXPECT_NEAR(f.predict(hi).mean, 1.0, 0.05);
  EXPECT_LT(f.predict(lo).variance, 0.01);
  EXPECT_GE(f.predict(edge).variance, 0.0);
}

TEST(RegressionForest, DeterministicAcrossWorkerCounts) {
  const auto d = step_data(200, 6);
  ForestOptions serial, parallel;
  serial.trees = parallel.trees = 16;
  parallel.workers = 4;
  RegressionForest a, b;
  a.fit(d.x, d.y, serial, 9);
  b.fit(d.x, d.y, parallel, 9);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(RegressionForest, JsonRoundTripPreservesPredictions) {
  const auto d = step_data(100, 8);
  RegressionForest f;
  f.fit(d.x, d.y, ForestOptions{}, 1);
  const auto g = RegressionForest::from_json(f.to_json());
  EXPECT_EQ(g.to_json().dump(), f.to_json().dump());
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(g.predict(d.x.row(i)).mean, f.predict(d.x.row(i)).mean);
    EXPECT_EQ(g.predict(d.x.row(i)).variance, f.predict(d.x.row(i)).variance);
  }
}

TEST(ClassificationForest, SeparatesClasses) {
  const auto train = step_data(300, 10);
  const auto test = step_data(200, 11);
  ClassificationForest f;
  ForestOptions o;
  o.trees = 25;
  f.fit(train.x, train.labels, 2, o, 3);
  int correct = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    correct += f.predict(test.x.row(i)) == test.labels[i];
    const auto p = f.probabilities(test.x.row(i));
    ASSERT_EQ(p.size(), 2u);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
  }
  EXPECT_GE(correct, 190);
  const auto g = ClassificationForest::from_json(f.to_json());
  for (std::size_t i = 0; i < 200; ++i) EXPECT_EQ(g.predict(test.x.row(i)), f.predict(test.x.row(i)));
}

TEST(ClassificationForest, TiesGoToLowestClass) {
  FeatureMatrix x;
  const double r[1] = {0.0};
  x.append_row(r);
  x.append_row(r);
  ClassificationForest f;
  ForestOptions o;
  o.trees = 1;
  o.bootstrap = false;
  const std::vector<int> labels{1, 0};
  f.fit(x, labels, 2, o, 1);
  EXPECT_EQ(f.predict(r), 0);
}
