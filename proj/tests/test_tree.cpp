#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "uwbdetect/estimators.hpp"
#include "uwbdetect/tree.hpp"
#include "oracles.hpp"

namespace uwbdetect {
namespace {

using oracle::BruteForceTree;

ClassificationTree grow_all(const Matrix& X, const std::vector<int>& y, int k, Criterion c) {
  std::vector<std::size_t> all(X.rows());
  std::iota(all.begin(), all.end(), 0);
  Rng rng(0);
  return ClassificationTree::grow(X, y, k, all, TreeParams{c, 0, SplitStrategy::best}, rng);
}

TEST(Impurity, ClosedForms) {
  EXPECT_DOUBLE_EQ(impurity(std::vector<double>{10, 0}, Criterion::gini), 0.0);
  EXPECT_DOUBLE_EQ(impurity(std::vector<double>{10, 0}, Criterion::entropy), 0.0);
  EXPECT_DOUBLE_EQ(impurity(std::vector<double>{5, 5}, Criterion::gini), 0.5);
  EXPECT_DOUBLE_EQ(impurity(std::vector<double>{5, 5}, Criterion::entropy), 1.0);
  EXPECT_NEAR(impurity(std::vector<double>{1, 2, 3}, Criterion::gini), 11.0 / 18.0, 1e-15);
  const double e = -(1.0 / 6 * std::log2(1.0 / 6) + 2.0 / 6 * std::log2(2.0 / 6) + 3.0 / 6 * std::log2(3.0 / 6));
  EXPECT_NEAR(impurity(std::vector<double>{1, 2, 3}, Criterion::entropy), e, 1e-15);
  EXPECT_NEAR(impurity(std::vector<std::size_t>{1, 1, 1, 1}, Criterion::entropy), 2.0, 1e-15);
  EXPECT_THROW(impurity(std::vector<double>{0, 0}, Criterion::gini), InvalidInput);
  EXPECT_THROW(impurity(std::vector<double>{}, Criterion::gini), InvalidInput);
}

TEST(MaxFeatures, Resolution) {
  EXPECT_EQ(resolve_max_features("auto", 480), 22u);
  EXPECT_EQ(resolve_max_features("sqrt", 480), 22u);
  EXPECT_EQ(resolve_max_features("log2", 480), 9u);
  EXPECT_EQ(resolve_max_features("sqrt", 16), 4u);
  EXPECT_EQ(resolve_max_features("log2", 1), 1u);
  EXPECT_EQ(resolve_max_features("sqrt", 1), 1u);
  EXPECT_THROW(resolve_max_features("half", 10), InvalidInput);
}

TEST(SplitThreshold, BetweenValues) {
  EXPECT_EQ(split_threshold(1.0, 2.0), 1.5);
  const double a = 1.0, b = std::nextafter(1.0, 2.0);
  const double t = split_threshold(a, b);
  EXPECT_LE(a, t);
  EXPECT_LT(t, b);
}

TEST(DecisionTree, OneFeatureSeparable) {
  Matrix X(6, 1);
  const double xs[] = {0.1, 0.4, 0.3, 2.0, 2.5, 1.9};
  for (int i = 0; i < 6; ++i) X(i, 0) = xs[i];
  const std::vector<Label> y{0, 0, 0, 1, 1, 1};
  EstimatorSpec spec{EstimatorKind::decision_tree, {{"criterion", "gini"}, {"max_features", "auto"}}, 3, {}};
  const auto model = fit(spec, X, y);
  const auto& tree = std::get<ClassificationTree>(model.params);
  EXPECT_EQ(tree.depth(), 1u);
  EXPECT_EQ(tree.nodes()[0].threshold, (0.4 + 1.9) / 2);
  EXPECT_EQ(predict(model, X), y);
}

TEST(DecisionTree, FourExampleInstanceMatchesBruteForce) {
  Matrix X(4, 2);
  const double v[4][2] = {{0, 1}, {1, 0}, {1, 1}, {2, 0}};
  for (int i = 0; i < 4; ++i) {
    X(i, 0) = v[i][0];
    X(i, 1) = v[i][1];
  }
  const std::vector<int> y{0, 1, 0, 1};
  for (auto c : {Criterion::gini, Criterion::entropy}) {
    const auto tree = grow_all(X, y, 2, c);
    EXPECT_EQ(tree.nodes(), BruteForceTree(X, y, 2, c).grow());
    for (int i = 0; i < 4; ++i) EXPECT_EQ(tree.predict_one(X.row(i)), y[i]);
  }
}

TEST(DecisionTree, MatchesBruteForceOnSmallRandomInstances) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(15);
    const std::size_t d = 1 + rng.below(4);
    const int k = 2 + int(rng.below(3));
    Matrix X(n, d);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse integer grid: plenty of duplicate values and tied splits.
      for (std::size_t j = 0; j < d; ++j) X(i, j) = double(rng.below(5)) * 0.5;
      y[i] = int(rng.below(std::uint64_t(k)));
    }
    for (auto c : {Criterion::gini, Criterion::entropy}) {
      EXPECT_EQ(grow_all(X, y, k, c).nodes(), BruteForceTree(X, y, k, c).grow()) << "seed " << seed;
    }
  }
}

TEST(DecisionTree, PureOrSingleRowLeaves) {
  Matrix X(3, 1);
  X(0, 0) = 1;
  X(1, 0) = 2;
  X(2, 0) = 3;
  const auto tree = grow_all(X, {1, 1, 1}, 2, Criterion::gini);
  ASSERT_EQ(tree.nodes().size(), 1u);
  EXPECT_EQ(tree.nodes()[0].value, 1);
  // Identical features, different labels: no valid split.
  Matrix same(2, 1, 4.0);
  const auto stuck = grow_all(same, {0, 1}, 2, Criterion::gini);
  EXPECT_EQ(stuck.nodes().size(), 1u);
}

TEST(DecisionTree, FullyGrownFitsDistinctRows) {
  Rng rng(4);
  Matrix X(60, 5);
  std::vector<int> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    for (std::size_t j = 0; j < 5; ++j) X(i, j) = rng.normal();
    y[i] = int(rng.below(3));
  }
  const auto tree = grow_all(X, y, 3, Criterion::entropy);
  for (std::size_t i = 0; i < 60; ++i) EXPECT_EQ(tree.predict_one(X.row(i)), y[i]);
}

TEST(RegressionTree, DepthAndLeafAssignment) {
  Rng rng(2);
  Matrix X(50, 3);
  std::vector<double> target(50);
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t j = 0; j < 3; ++j) X(i, j) = rng.normal();
    target[i] = X(i, 1) > 0 ? 1.0 : -1.0;
  }
  const FeatureOrder order(X);
  std::vector<std::int32_t> leaf;
  const auto tree = RegressionTree::grow(X, order, target, 3, leaf);
  ASSERT_EQ(leaf.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(tree.leaf_index(X.row(i)), leaf[i]);
    EXPECT_TRUE(tree.nodes()[leaf[i]].is_leaf());
  }
  // The first split isolates the sign of feature 1 exactly.
  EXPECT_EQ(tree.nodes()[0].feature, 1);
}

}  // namespace
}  // namespace uwbdetect
