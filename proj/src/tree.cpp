#include "uwbdetect/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace uwbdetect {

Criterion criterion_from_string(std::string_view name) {
  if (name == "gini") return Criterion::gini;
  if (name == "entropy") return Criterion::entropy;
  throw InvalidInput("unknown split criterion '" + std::string(name) + "'");
}

double impurity(std::span<const double> counts, Criterion criterion) {
  double total = 0.0;
  for (double c : counts) {
    if (c < 0.0) throw InvalidInput("impurity: negative class count");
    total += c;
  }
  if (!(total > 0.0)) throw InvalidInput("impurity: counts must sum to a positive value");
  double acc = 0.0;
  if (criterion == Criterion::gini) {
    for (double c : counts) {
      const double p = c / total;
      acc += p * p;
    }
    return 1.0 - acc;
  }
  for (double c : counts) {
    if (c > 0.0) {
      const double p = c / total;
      acc -= p * std::log2(p);
    }
  }
  return acc;
}

double impurity(std::span<const std::size_t> counts, Criterion criterion) {
  std::vector<double> d(counts.begin(), counts.end());
  return impurity(std::span<const double>(d), criterion);
}

std::size_t resolve_max_features(std::string_view setting, std::size_t n_features) {
  if (n_features == 0) throw InvalidInput("resolve_max_features: no features");
  double k = 0.0;
  if (setting == "auto" || setting == "sqrt") {
    k = std::ceil(std::sqrt(static_cast<double>(n_features)));
  } else if (setting == "log2") {
    k = std::ceil(std::log2(static_cast<double>(n_features)));
  } else {
    throw InvalidInput("unknown max_features '" + std::string(setting) + "'");
  }
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n_features);
}

double split_threshold(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return (mid < b) ? mid : a;
}

namespace {

int majority(std::span<const double> counts) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(counts.size()); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return best;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, std::span<const int> y, int n_classes, const TreeParams& params, Rng& rng)
      : X_(X), y_(y), k_(static_cast<std::size_t>(n_classes)), params_(params), rng_(rng) {
    n_features_ = X.cols();
    max_features_ = params.max_features == 0 ? n_features_ : std::min(params.max_features, n_features_);
    features_.resize(n_features_);
    std::iota(features_.begin(), features_.end(), 0);
  }

  std::int32_t build(std::vector<std::size_t>& samples) {
    std::vector<double> counts(k_, 0.0);
    for (auto s : samples) counts[static_cast<std::size_t>(y_[s])] += 1.0;

    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({});
    nodes_[index].value = majority(counts);

    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
    if (pure || samples.size() < 2) return index;

    const auto split = find_split(samples, counts);
    if (split.feature < 0) return index;

    std::vector<std::size_t> right;
    std::vector<std::size_t> left;
    for (auto s : samples) {
      (X_(s, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    nodes_[index].feature = split.feature;
    nodes_[index].threshold = split.threshold;
    const auto l = build(left);
    nodes_[index].left = l;
    const auto r = build(right);
    nodes_[index].right = r;
    return index;
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double decrease = -std::numeric_limits<double>::infinity();
  };

  std::vector<std::size_t> sample_features() {
    if (max_features_ >= n_features_) return features_;
    // Partial Fisher-Yates over a persistent permutation, then sorted so the
    // tie-break order does not depend on the draw order.
    for (std::size_t i = 0; i < max_features_; ++i) {
      std::swap(features_[i], features_[i + rng_.below(n_features_ - i)]);
    }
    std::vector<std::size_t> chosen(features_.begin(), features_.begin() + static_cast<long>(max_features_));
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  void consider(Split& best, std::size_t feature, double threshold, double decrease) const {
    if (decrease > best.decrease + kSplitTieMargin) {
      best = {static_cast<std::int32_t>(feature), threshold, decrease};
    }
  }

  Split find_split(const std::vector<std::size_t>& samples, const std::vector<double>& counts) {
    const double n = static_cast<double>(samples.size());
    const double parent = impurity(std::span<const double>(counts), params_.criterion);
    Split best;
    std::vector<double> left(k_), right(k_);
    std::vector<std::pair<double, int>> column(samples.size());

    for (const auto f : sample_features()) {
      if (params_.strategy == SplitStrategy::best) {
        for (std::size_t i = 0; i < samples.size(); ++i) column[i] = {X_(samples[i], f), y_[samples[i]]};
        std::sort(column.begin(), column.end());
        std::fill(left.begin(), left.end(), 0.0);
        right = counts;
        for (std::size_t i = 0; i + 1 < column.size(); ++i) {
          const auto c = static_cast<std::size_t>(column[i].second);
          left[c] += 1.0;
          right[c] -= 1.0;
          if (!(column[i].first < column[i + 1].first)) continue;
          const double nl = static_cast<double>(i + 1);
          const double nr = n - nl;
          const double child = (nl * impurity(std::span<const double>(left), params_.criterion) +
                                nr * impurity(std::span<const double>(right), params_.criterion)) / n;
          consider(best, f, split_threshold(column[i].first, column[i + 1].first), parent - child);
        }
      } else {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (auto s : samples) {
          lo = std::min(lo, X_(s, f));
          hi = std::max(hi, X_(s, f));
        }
        if (!(lo < hi)) continue;
        double threshold = rng_.uniform(lo, hi);
        if (!(threshold < hi)) threshold = lo;
        std::fill(left.begin(), left.end(), 0.0);
        double nl = 0.0;
        for (auto s : samples) {
          if (X_(s, f) <= threshold) {
            left[static_cast<std::size_t>(y_[s])] += 1.0;
            nl += 1.0;
          }
        }
        for (std::size_t c = 0; c < k_; ++c) right[c] = counts[c] - left[c];
        const double nr = n - nl;
        const double child = (nl * impurity(std::span<const double>(left), params_.criterion) +
                              nr * impurity(std::span<const double>(right), params_.criterion)) / n;
        consider(best, f, threshold, parent - child);
      }
    }
    return best;
  }

  const Matrix& X_;
  std::span<const int> y_;
  std::size_t k_;
  TreeParams params_;
  Rng& rng_;
  std::size_t n_features_ = 0;
  std::size_t max_features_ = 0;
  std::vector<std::size_t> features_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

ClassificationTree ClassificationTree::grow(const Matrix& X, std::span<const int> y, int n_classes,
                                            std::span<const std::size_t> samples,
                                            const TreeParams& params, Rng& rng) {
  if (samples.empty()) throw InvalidInput("cannot grow a tree on zero samples");
  if (n_classes < 1) throw InvalidInput("tree needs at least one class");
  TreeBuilder builder(X, y, n_classes, params, rng);
  std::vector<std::size_t> root(samples.begin(), samples.end());
  builder.build(root);
  return ClassificationTree(builder.take());
}

int ClassificationTree::predict_one(std::span<const double> x) const {
  std::int32_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    i = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes_[i].value;
}

std::size_t ClassificationTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

FeatureOrder::FeatureOrder(const Matrix& X)
    : n_rows_(X.rows()), order_(X.rows() * X.cols()), values_(X.rows() * X.cols()) {
  for (std::size_t f = 0; f < X.cols(); ++f) {
    auto* first = order_.data() + f * n_rows_;
    std::iota(first, first + n_rows_, 0u);
    std::sort(first, first + n_rows_, [&](std::uint32_t a, std::uint32_t b) {
      const double va = X(a, f);
      const double vb = X(b, f);
      return va < vb || (va == vb && a < b);
    });
    for (std::size_t i = 0; i < n_rows_; ++i) values_[f * n_rows_ + i] = X(first[i], f);
  }
}

RegressionTree RegressionTree::grow(const Matrix& X, const FeatureOrder& order,
                                    std::span<const double> target, int max_depth,
                                    std::vector<std::int32_t>& leaf_of_row) {
  const std::size_t n = X.rows();
  leaf_of_row.assign(n, 0);
  std::vector<RegressionNode> nodes(1);

  struct Frontier {
    std::int32_t node;
    double sum = 0.0;
    std::uint32_t count = 0;
    double parent = 0.0;  // sum^2 / count
    // running state while scanning one feature
    double run_sum = 0.0;
    std::uint32_t run_count = 0;
    double last = 0.0;
    // best split so far
    double gain = 0.0;
    std::int32_t feature = -1;
    double threshold = 0.0;
  };
  // Reciprocals of every possible row count keep divisions out of the scan.
  std::vector<double> inv(n + 1, 0.0);
  for (std::size_t c = 1; c <= n; ++c) inv[c] = 1.0 / static_cast<double>(c);

  std::vector<Frontier> frontier{{0}};
  for (std::size_t r = 0; r < n; ++r) {
    frontier[0].sum += target[r];
    ++frontier[0].count;
  }
  std::vector<std::int32_t> slot_of_node(1, 0);
  std::vector<std::int32_t> slot_of_row(n);

  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    for (std::size_t r = 0; r < n; ++r) slot_of_row[r] = slot_of_node[static_cast<std::size_t>(leaf_of_row[r])];
    for (auto& fr : frontier) fr.parent = fr.sum * fr.sum * inv[fr.count];
    // One pass per feature over the presorted rows serves every frontier node.
    for (std::size_t f = 0; f < X.cols(); ++f) {
      for (auto& fr : frontier) {
        fr.run_sum = 0.0;
        fr.run_count = 0;
      }
      const auto rows = order.rows_by(f);
      const auto values = order.values_by(f);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = rows[i];
        const auto slot = slot_of_row[row];
        if (slot < 0) continue;
        auto& fr = frontier[static_cast<std::size_t>(slot)];
        const double x = values[i];
        if (fr.run_count > 0 && fr.last < x) {
          const double sr = fr.sum - fr.run_sum;
          const double gain =
              fr.run_sum * fr.run_sum * inv[fr.run_count] + sr * sr * inv[fr.count - fr.run_count] - fr.parent;
          if (gain > fr.gain) {
            fr.gain = gain;
            fr.feature = static_cast<std::int32_t>(f);
            fr.threshold = split_threshold(fr.last, x);
          }
        }
        fr.run_sum += target[row];
        ++fr.run_count;
        fr.last = x;
      }
    }

    std::vector<Frontier> next;
    for (const auto& fr : frontier) {
      if (fr.feature < 0) continue;
      auto& node = nodes[static_cast<std::size_t>(fr.node)];
      node.feature = fr.feature;
      node.threshold = fr.threshold;
      node.left = static_cast<std::int32_t>(nodes.size());
      node.right = node.left + 1;
      nodes.emplace_back();
      nodes.emplace_back();
      next.push_back({nodes[static_cast<std::size_t>(fr.node)].left});
      next.push_back({nodes[static_cast<std::size_t>(fr.node)].right});
    }
    slot_of_node.assign(nodes.size(), -1);
    for (std::size_t s = 0; s < next.size(); ++s) slot_of_node[static_cast<std::size_t>(next[s].node)] = static_cast<std::int32_t>(s);

    for (std::size_t r = 0; r < n; ++r) {
      const auto& node = nodes[static_cast<std::size_t>(leaf_of_row[r])];
      if (node.is_leaf()) continue;
      const auto child = X(r, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
      leaf_of_row[r] = child;
      auto& fr = next[static_cast<std::size_t>(slot_of_node[static_cast<std::size_t>(child)])];
      fr.sum += target[r];
      ++fr.count;
    }
    // Single-row nodes cannot split.
    for (auto& fr : next) {
      if (fr.count < 2) slot_of_node[static_cast<std::size_t>(fr.node)] = -1;
    }
    frontier = std::move(next);
  }
  return RegressionTree(std::move(nodes));
}

std::int32_t RegressionTree::leaf_index(std::span<const double> x) const {
  std::int32_t i = 0;
  while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& node = nodes_[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return i;
}

}  // namespace uwbdetect
