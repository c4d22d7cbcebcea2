#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "uwbdetect/common.hpp"
#include "uwbdetect/params.hpp"
#include "uwbdetect/tree.hpp"

namespace uwbdetect {

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::k_nearest_neighbors;
  ParamMap params;
  std::uint64_t seed = 0;
  SolverSettings settings;
};

/// scores = weights * x + bias, one row per class.
struct LinearModel {
  Matrix weights;
  std::vector<double> bias;
  bool operator==(const LinearModel&) const = default;
};

struct NeighborModel {
  Matrix points;
  std::vector<int> targets;  // class indices
  std::int64_t n_neighbors = 1;
  bool operator==(const NeighborModel&) const = default;
};

struct ForestModel {
  std::vector<ClassificationTree> trees;
  bool operator==(const ForestModel&) const = default;
};

/// Additive multinomial model: F_k(x) = init_k + sum_s stage[s][k](x).
/// Leaf values already include learning rate and any step damping.
struct BoostedModel {
  std::vector<double> init;
  std::vector<std::vector<RegressionTree>> stages;
  bool operator==(const BoostedModel&) const = default;
};

using ModelParams = std::variant<LinearModel, NeighborModel, ClassificationTree, ForestModel, BoostedModel>;

struct TrainedModel {
  EstimatorKind kind = EstimatorKind::k_nearest_neighbors;
  std::vector<Label> classes;  // sorted distinct training labels
  std::size_t n_features = 0;
  ModelParams params;

  bool operator==(const TrainedModel&) const = default;
};

/// Trains one estimator. Deterministic in (spec, X, y).
TrainedModel fit(const EstimatorSpec& spec, const Matrix& X, std::span<const Label> y);

std::vector<Label> predict(const TrainedModel& model, const Matrix& X);

/// Per-class linear scores (rows = samples). Linear kinds only.
Matrix decision_scores(const TrainedModel& model, const Matrix& X);

/// Percentage of positions where the labels agree.
double accuracy(std::span<const Label> y_true, std::span<const Label> y_pred);

/// Ensembles whose first m members do not depend on the total member
/// count: a model fit with n_estimators = m equals the m-member prefix of
/// one fit with a larger n_estimators.
bool is_prefix_ensemble(EstimatorKind kind);
TrainedModel truncate_ensemble(const TrainedModel& model, std::size_t members);

/// Training multinomial deviance of a boosting model after each stage
/// (index 0 = initial prior). Exposed for diagnostics and tests.
std::vector<double> boosting_deviance_path(const TrainedModel& model, const Matrix& X,
                                           std::span<const Label> y);

namespace detail {

/// Maps labels to indices into `classes`; throws on unknown labels.
std::vector<int> encode_labels(std::span<const Label> y, std::span<const Label> classes);
int argmax_row(std::span<const double> scores);

LinearModel fit_logistic_regression(const Matrix& X, std::span<const int> y, int n_classes, double C,
                                    std::string_view solver, std::uint64_t seed,
                                    const SolverSettings& settings);
/// Mean cross-entropy plus (1/(2 C n)) ||W||^2; gradient written into `grad`.
/// theta holds the K x d weights row-major, then the K biases.
double logistic_objective(const Matrix& X, std::span<const int> y, int n_classes, double C,
                          std::span<const double> theta, std::span<double> grad);
LinearModel fit_perceptron(const Matrix& X, std::span<const int> y, int n_classes, double alpha,
                           std::uint64_t seed, const SolverSettings& settings);
LinearModel fit_linear_svc(const Matrix& X, std::span<const int> y, int n_classes, double C,
                           const SolverSettings& settings);
std::vector<int> predict_neighbors(const NeighborModel& model, const Matrix& X, int n_classes);
BoostedModel fit_gradient_boosting(const Matrix& X, std::span<const int> y, int n_classes,
                                   std::int64_t n_stages, double learning_rate,
                                   const SolverSettings& settings);
std::vector<double> boosted_scores(const BoostedModel& model, std::span<const double> x,
                                   std::size_t n_stages);

}  // namespace detail

}  // namespace uwbdetect
