#include "uwbdetect/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uwbdetect/dataset.hpp"
#include "uwbdetect/rng.hpp"

namespace uwbdetect {

namespace detail {

std::vector<int> encode_labels(std::span<const Label> y, std::span<const Label> classes) {
  std::vector<int> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), y[i]);
    if (it == classes.end() || *it != y[i]) throw InvalidInput("label " + std::to_string(y[i]) + " not in class list");
    out[i] = static_cast<int>(it - classes.begin());
  }
  return out;
}

int argmax_row(std::span<const double> scores) {
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

}  // namespace detail

namespace {

TreeParams tree_params(const ParamMap& p, std::size_t n_features, SplitStrategy strategy) {
  return {criterion_from_string(p.get_string("criterion")),
          resolve_max_features(p.get_string("max_features"), n_features), strategy};
}

ForestModel fit_forest(const Matrix& X, std::span<const int> y, int n_classes, std::int64_t members,
                       const TreeParams& params, bool bootstrap, std::uint64_t seed) {
  ForestModel forest;
  const std::size_t n = X.rows();
  std::vector<std::size_t> samples(n);
  for (std::int64_t m = 0; m < members; ++m) {
    // Member m draws only from its own stream, so member m is the same
    // tree whatever the ensemble size.
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
    if (bootstrap) {
      for (auto& s : samples) s = static_cast<std::size_t>(rng.below(n));
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    forest.trees.push_back(ClassificationTree::grow(X, y, n_classes, samples, params, rng));
  }
  return forest;
}

int forest_vote(const ForestModel& forest, std::span<const double> x, std::size_t n_classes) {
  std::vector<int> votes(n_classes, 0);
  for (const auto& tree : forest.trees) ++votes[static_cast<std::size_t>(tree.predict_one(x))];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

void check_features(const Matrix& X) {
  for (double v : X.data()) {
    if (!std::isfinite(v)) throw InvalidInput("feature matrix contains non-finite values");
  }
}

}  // namespace

TrainedModel fit(const EstimatorSpec& spec, const Matrix& X, std::span<const Label> y) {
  if (X.rows() == 0 || X.cols() == 0) throw InvalidInput("fit: empty feature matrix");
  if (X.rows() != y.size()) throw InvalidInput("fit: feature rows and labels differ in length");
  check_features(X);
  validate_params(spec.kind, spec.params);

  TrainedModel model;
  model.kind = spec.kind;
  model.classes = distinct_labels(y);
  model.n_features = X.cols();
  if (model.classes.size() < 2) throw InvalidInput("fit: need at least two classes");
  if (X.rows() < model.classes.size()) throw InvalidInput("fit: fewer examples than classes");

  const auto yi = detail::encode_labels(y, model.classes);
  const int k = static_cast<int>(model.classes.size());
  const auto& p = spec.params;
  const auto& s = spec.settings;

  switch (spec.kind) {
    case EstimatorKind::logistic_regression:
      model.params = detail::fit_logistic_regression(X, yi, k, p.get_double("C"), p.get_string("solver"), spec.seed, s);
      break;
    case EstimatorKind::perceptron:
      model.params = detail::fit_perceptron(X, yi, k, p.get_double("alpha"), spec.seed, s);
      break;
    case EstimatorKind::k_nearest_neighbors:
      model.params = NeighborModel{X, yi, p.get_int("n_neighbors")};
      break;
    case EstimatorKind::linear_svc:
      model.params = detail::fit_linear_svc(X, yi, k, p.get_double("C"), s);
      break;
    case EstimatorKind::decision_tree: {
      Rng rng(spec.seed);
      std::vector<std::size_t> all(X.rows());
      std::iota(all.begin(), all.end(), 0);
      model.params = ClassificationTree::grow(X, yi, k, all, tree_params(p, X.cols(), SplitStrategy::best), rng);
      break;
    }
    case EstimatorKind::random_forest:
      model.params = fit_forest(X, yi, k, p.get_int("n_estimators"),
                                tree_params(p, X.cols(), SplitStrategy::best), true, spec.seed);
      break;
    case EstimatorKind::extra_trees:
      model.params = fit_forest(X, yi, k, p.get_int("n_estimators"),
                                tree_params(p, X.cols(), SplitStrategy::random), false, spec.seed);
      break;
    case EstimatorKind::gradient_boosting:
      model.params = detail::fit_gradient_boosting(X, yi, k, p.get_int("n_estimators"),
                                                   p.get_double("learning_rate"), s);
      break;
  }
  return model;
}

Matrix decision_scores(const TrainedModel& model, const Matrix& X) {
  const auto* lin = std::get_if<LinearModel>(&model.params);
  if (!lin) throw InvalidInput("decision_scores: not a linear model");
  if (X.cols() != model.n_features) throw InvalidInput("decision_scores: feature count mismatch");
  const std::size_t k = lin->bias.size();
  Matrix scores(X.rows(), k);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      const auto w = lin->weights.row(c);
      double s = lin->bias[c];
      for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
      scores(i, c) = s;
    }
  }
  return scores;
}

std::vector<Label> predict(const TrainedModel& model, const Matrix& X) {
  if (X.cols() != model.n_features) {
    throw InvalidInput("predict: model expects " + std::to_string(model.n_features) + " features, got " +
                       std::to_string(X.cols()));
  }
  const std::size_t k = model.classes.size();
  std::vector<int> idx(X.rows());
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          const Matrix scores = decision_scores(model, X);
          for (std::size_t i = 0; i < X.rows(); ++i) idx[i] = detail::argmax_row(scores.row(i));
        } else if constexpr (std::is_same_v<T, NeighborModel>) {
          idx = detail::predict_neighbors(m, X, static_cast<int>(k));
        } else if constexpr (std::is_same_v<T, ClassificationTree>) {
          for (std::size_t i = 0; i < X.rows(); ++i) idx[i] = m.predict_one(X.row(i));
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          for (std::size_t i = 0; i < X.rows(); ++i) idx[i] = forest_vote(m, X.row(i), k);
        } else {
          for (std::size_t i = 0; i < X.rows(); ++i) {
            idx[i] = detail::argmax_row(detail::boosted_scores(m, X.row(i), m.stages.size()));
          }
        }
      },
      model.params);
  std::vector<Label> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = model.classes[static_cast<std::size_t>(idx[i])];
  return out;
}

double accuracy(std::span<const Label> y_true, std::span<const Label> y_pred) {
  if (y_true.size() != y_pred.size()) throw InvalidInput("accuracy: label vectors differ in length");
  if (y_true.empty()) throw InvalidInput("accuracy: empty label vectors");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) hits += y_true[i] == y_pred[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(y_true.size());
}

bool is_prefix_ensemble(EstimatorKind kind) {
  return kind == EstimatorKind::random_forest || kind == EstimatorKind::extra_trees ||
         kind == EstimatorKind::gradient_boosting;
}

TrainedModel truncate_ensemble(const TrainedModel& model, std::size_t members) {
  TrainedModel out = model;
  if (auto* forest = std::get_if<ForestModel>(&out.params)) {
    if (members == 0 || members > forest->trees.size()) throw InvalidInput("truncate_ensemble: bad member count");
    forest->trees.resize(members);
  } else if (auto* boosted = std::get_if<BoostedModel>(&out.params)) {
    if (members == 0 || members > boosted->stages.size()) throw InvalidInput("truncate_ensemble: bad stage count");
    boosted->stages.resize(members);
  } else {
    throw InvalidInput("truncate_ensemble: not an ensemble model");
  }
  return out;
}

std::vector<double> boosting_deviance_path(const TrainedModel& model, const Matrix& X,
                                           std::span<const Label> y) {
  const auto* boosted = std::get_if<BoostedModel>(&model.params);
  if (!boosted) throw InvalidInput("boosting_deviance_path: not a boosting model");
  const auto yi = detail::encode_labels(y, model.classes);
  const std::size_t k = model.classes.size();
  Matrix F(X.rows(), k);
  for (std::size_t i = 0; i < X.rows(); ++i) std::copy(boosted->init.begin(), boosted->init.end(), F.row(i).begin());
  auto dev = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < F.rows(); ++i) {
      const auto f = F.row(i);
      const double peak = *std::max_element(f.begin(), f.end());
      double s = 0.0;
      for (double v : f) s += std::exp(v - peak);
      total += peak + std::log(s) - f[static_cast<std::size_t>(yi[i])];
    }
    return total / static_cast<double>(F.rows());
  };
  std::vector<double> path{dev()};
  for (const auto& stage : boosted->stages) {
    for (std::size_t i = 0; i < X.rows(); ++i) {
      for (std::size_t c = 0; c < k; ++c) F(i, c) += stage[c].predict_one(X.row(i));
    }
    path.push_back(dev());
  }
  return path;
}

}  // namespace uwbdetect
