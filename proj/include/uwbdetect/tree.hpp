#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "uwbdetect/common.hpp"
#include "uwbdetect/rng.hpp"

namespace uwbdetect {

enum class Criterion : std::uint8_t { gini = 0, entropy = 1 };

Criterion criterion_from_string(std::string_view name);

/// gini = 1 - sum p^2, entropy = -sum p log2 p (0 log 0 = 0).
double impurity(std::span<const double> counts, Criterion criterion);
double impurity(std::span<const std::size_t> counts, Criterion criterion);

/// Number of features examined per split for max_features in
/// {auto, sqrt, log2}; auto is sqrt. Rounded up, at least 1.
std::size_t resolve_max_features(std::string_view setting, std::size_t n_features);

/// Candidate splits whose impurity decrease is within this margin of the
/// current best are ties; the earlier (lower feature, lower threshold) wins.
inline constexpr double kSplitTieMargin = 1e-12;

/// Midpoint threshold between two consecutive distinct values a < b,
/// guaranteed to satisfy a <= t < b.
double split_threshold(double a, double b);

enum class SplitStrategy : std::uint8_t {
  best,    // exhaustive threshold search (CART)
  random,  // one uniform threshold per candidate feature (extremely randomized)
};

struct TreeParams {
  Criterion criterion = Criterion::gini;
  std::size_t max_features = 0;  // 0 = all features
  SplitStrategy strategy = SplitStrategy::best;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t value = 0;     // majority class index of the node

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Fully grown classification tree over class indices 0..n_classes-1.
/// Nodes are stored in preorder (node, left subtree, right subtree).
class ClassificationTree {
 public:
  ClassificationTree() = default;
  explicit ClassificationTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  /// Grows on the rows listed in `samples` (duplicates act as weights).
  /// Stops at pure nodes, single samples, or nodes with no valid split
  /// among the sampled features.
  static ClassificationTree grow(const Matrix& X, std::span<const int> y, int n_classes,
                                 std::span<const std::size_t> samples, const TreeParams& params,
                                 Rng& rng);

  int predict_one(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;

  bool operator==(const ClassificationTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

/// Per-feature row order by ascending value (ties by row index), computed
/// once and reused by every regression tree of a boosting run.
class FeatureOrder {
 public:
  explicit FeatureOrder(const Matrix& X);
  std::span<const std::uint32_t> rows_by(std::size_t feature) const {
    return {order_.data() + feature * n_rows_, n_rows_};
  }
  /// Feature values in the order of rows_by(feature).
  std::span<const double> values_by(std::size_t feature) const {
    return {values_.data() + feature * n_rows_, n_rows_};
  }

 private:
  std::size_t n_rows_;
  std::vector<std::uint32_t> order_;
  std::vector<double> values_;
};

struct RegressionNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const RegressionNode&) const = default;
};

/// Least-squares regression tree grown level by level to a fixed depth over
/// all features. Leaf values are assigned by the caller.
class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<RegressionNode> nodes) : nodes_(std::move(nodes)) {}

  /// `leaf_of_row` receives, for every training row, its leaf node index.
  static RegressionTree grow(const Matrix& X, const FeatureOrder& order,
                             std::span<const double> target, int max_depth,
                             std::vector<std::int32_t>& leaf_of_row);

  std::int32_t leaf_index(std::span<const double> x) const;
  double predict_one(std::span<const double> x) const { return nodes_[leaf_index(x)].value; }

  std::vector<RegressionNode>& nodes() { return nodes_; }
  const std::vector<RegressionNode>& nodes() const { return nodes_; }

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<RegressionNode> nodes_;
};

}  // namespace uwbdetect
