#include <algorithm>
#include <cmath>

#include "uwbdetect/estimators.hpp"

namespace uwbdetect::detail {

namespace {

// Mean negative log-likelihood of the true classes under softmax(F).
double deviance(const Matrix& F, std::span<const int> y) {
  double total = 0.0;
  for (std::size_t i = 0; i < F.rows(); ++i) {
    const auto f = F.row(i);
    const double peak = *std::max_element(f.begin(), f.end());
    double s = 0.0;
    for (double v : f) s += std::exp(v - peak);
    total += peak + std::log(s) - f[static_cast<std::size_t>(y[i])];
  }
  return total / static_cast<double>(F.rows());
}

}  // namespace

BoostedModel fit_gradient_boosting(const Matrix& X, std::span<const int> y, int n_classes,
                                   std::int64_t n_stages, double learning_rate,
                                   const SolverSettings& settings) {
  const std::size_t n = X.rows();
  const auto k = static_cast<std::size_t>(n_classes);
  const double kk = static_cast<double>(k);

  BoostedModel model;
  std::vector<double> counts(k, 0.0);
  for (int label : y) counts[static_cast<std::size_t>(label)] += 1.0;
  for (double c : counts) model.init.push_back(std::log(std::max(c, 1.0) / static_cast<double>(n)));

  Matrix F(n, k);
  for (std::size_t i = 0; i < n; ++i) std::copy(model.init.begin(), model.init.end(), F.row(i).begin());

  const FeatureOrder order(X);
  Matrix prob(n, k), step(n, k), trial(n, k);
  std::vector<double> residual(n);
  std::vector<std::int32_t> leaf_of_row;
  double current = deviance(F, y);

  for (std::int64_t s = 0; s < n_stages; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto f = F.row(i);
      auto p = prob.row(i);
      const double peak = *std::max_element(f.begin(), f.end());
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) total += (p[c] = std::exp(f[c] - peak));
      for (double& v : p) v /= total;
    }

    std::vector<RegressionTree> trees;
    trees.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n; ++i) residual[i] = (y[i] == static_cast<int>(c) ? 1.0 : 0.0) - prob(i, c);
      auto tree = RegressionTree::grow(X, order, residual, settings.boosting_max_depth, leaf_of_row);
      auto& nodes = tree.nodes();
      std::vector<double> num(nodes.size(), 0.0), den(nodes.size(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto leaf = static_cast<std::size_t>(leaf_of_row[i]);
        num[leaf] += residual[i];
        den[leaf] += std::abs(residual[i]) * (1.0 - std::abs(residual[i]));
      }
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (!nodes[j].is_leaf()) continue;
        const double gamma = den[j] < 1e-150 ? 0.0 : (kk - 1.0) / kk * num[j] / den[j];
        nodes[j].value = learning_rate * gamma;
      }
      for (std::size_t i = 0; i < n; ++i) step(i, c) = nodes[static_cast<std::size_t>(leaf_of_row[i])].value;
      trees.push_back(std::move(tree));
    }

    // Halve the stage until training deviance does not increase.
    double scale = 1.0;
    double next = current;
    bool accepted = false;
    for (int halvings = 0; halvings <= 30; ++halvings, scale *= 0.5) {
      for (std::size_t j = 0; j < F.data().size(); ++j) trial.data()[j] = F.data()[j] + scale * step.data()[j];
      next = deviance(trial, y);
      if (next <= current) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      scale = 0.0;
      trial = F;
      next = current;
    }
    if (scale != 1.0) {
      for (auto& tree : trees) {
        for (auto& node : tree.nodes()) node.value *= scale;
      }
    }
    std::swap(F, trial);
    current = next;
    model.stages.push_back(std::move(trees));
  }
  return model;
}

std::vector<double> boosted_scores(const BoostedModel& model, std::span<const double> x,
                                   std::size_t n_stages) {
  std::vector<double> f = model.init;
  const std::size_t stages = std::min(n_stages, model.stages.size());
  for (std::size_t s = 0; s < stages; ++s) {
    for (std::size_t c = 0; c < f.size(); ++c) f[c] += model.stages[s][c].predict_one(x);
  }
  return f;
}

}  // namespace uwbdetect::detail
