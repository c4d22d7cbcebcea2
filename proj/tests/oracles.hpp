#pragma once

// Slow, obviously-correct references shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "uwbdetect/dataset.hpp"
#include "uwbdetect/tree.hpp"

namespace uwbdetect::oracle {

// Independent CART reference: at every impure node with at least two rows,
// try every (feature, midpoint) pair by explicit partitioning and keep the
// largest impurity decrease; earlier (feature, threshold) wins ties.
class BruteForceTree {
 public:
  BruteForceTree(const Matrix& X, const std::vector<int>& y, int k, Criterion c) : X_(X), y_(y), k_(k), c_(c) {}

  std::vector<TreeNode> grow() {
    std::vector<std::size_t> all(X_.rows());
    std::iota(all.begin(), all.end(), 0);
    build(all);
    return nodes_;
  }

 private:
  double node_impurity(const std::vector<std::size_t>& rows) const {
    std::vector<double> p(k_, 0.0);
    for (auto r : rows) p[y_[r]] += 1.0 / double(rows.size());
    double v = c_ == Criterion::gini ? 1.0 : 0.0;
    for (double q : p) {
      if (c_ == Criterion::gini) v -= q * q;
      else if (q > 0) v -= q * std::log2(q);
    }
    return v;
  }

  std::int32_t build(const std::vector<std::size_t>& rows) {
    std::vector<int> counts(k_, 0);
    for (auto r : rows) ++counts[y_[r]];
    const auto index = std::int32_t(nodes_.size());
    nodes_.push_back({});
    nodes_[index].value = int(std::max_element(counts.begin(), counts.end()) - counts.begin());
    const auto nonzero = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; });
    if (nonzero <= 1 || rows.size() < 2) return index;

    const double parent = node_impurity(rows);
    const double n = double(rows.size());
    int best_f = -1;
    double best_t = 0, best_gain = -INFINITY;
    for (std::size_t f = 0; f < X_.cols(); ++f) {
      std::vector<double> values;
      for (auto r : rows) values.push_back(X_(r, f));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double t = split_threshold(values[i], values[i + 1]);
        std::vector<std::size_t> l, r;
        for (auto row : rows) (X_(row, f) <= t ? l : r).push_back(row);
        const double gain = parent - (double(l.size()) * node_impurity(l) + double(r.size()) * node_impurity(r)) / n;
        if (gain > best_gain + kSplitTieMargin) {
          best_gain = gain;
          best_f = int(f);
          best_t = t;
        }
      }
    }
    if (best_f < 0) return index;
    std::vector<std::size_t> l, r;
    for (auto row : rows) (X_(row, best_f) <= best_t ? l : r).push_back(row);
    nodes_[index].feature = best_f;
    nodes_[index].threshold = best_t;
    const auto li = build(l);
    nodes_[index].left = li;
    const auto ri = build(r);
    nodes_[index].right = ri;
    return index;
  }

  const Matrix& X_;
  const std::vector<int>& y_;
  int k_;
  Criterion c_;
  std::vector<TreeNode> nodes_;
};

// Majority vote over the n nearest rows by a stable full sort of Euclidean
// distances; ties go to the smallest label.
inline std::vector<Label> brute_force_knn(const Matrix& train, std::span<const Label> y, const Matrix& query, std::size_t n) {
  std::vector<Label> classes = distinct_labels(y);
  std::vector<Label> out;
  for (std::size_t q = 0; q < query.rows(); ++q) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < train.rows(); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < train.cols(); ++j) s += std::pow(train(i, j) - query(q, j), 2);
      d.push_back({std::sqrt(s), i});
    }
    std::stable_sort(d.begin(), d.end(), [](auto& a, auto& b) { return a.first < b.first; });
    std::map<Label, int> votes;
    for (std::size_t i = 0; i < std::min(n, d.size()); ++i) ++votes[y[d[i].second]];
    Label best = classes.front();
    int best_votes = -1;
    for (Label c : classes) {
      if (votes[c] > best_votes) {
        best = c;
        best_votes = votes[c];
      }
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace uwbdetect::oracle
