#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace uwbdetect {

/// The eight estimators, in the order reports list them.
enum class EstimatorKind {
  logistic_regression,
  perceptron,
  k_nearest_neighbors,
  linear_svc,
  decision_tree,
  random_forest,
  extra_trees,
  gradient_boosting,
};

inline constexpr EstimatorKind kAllEstimators[] = {
    EstimatorKind::logistic_regression, EstimatorKind::perceptron,
    EstimatorKind::k_nearest_neighbors, EstimatorKind::linear_svc,
    EstimatorKind::decision_tree,       EstimatorKind::random_forest,
    EstimatorKind::extra_trees,         EstimatorKind::gradient_boosting,
};

/// Short code used in reports: LR, Per, kNN, SVM, DT, RF, ET, SGB.
std::string_view short_name(EstimatorKind kind);
/// Accepts short codes (case-insensitive) and snake_case full names.
EstimatorKind estimator_kind_from_string(std::string_view name);
std::size_t kind_index(EstimatorKind kind);

using ParamValue = std::variant<std::int64_t, double, std::string>;

std::string format_param(const ParamValue& v);
/// Shortest decimal that round-trips.
std::string format_double(double v);

struct Param {
  std::string name;
  ParamValue value;
  bool operator==(const Param&) const = default;
};

/// Ordered name -> value map; order follows the grid axes.
class ParamMap {
 public:
  ParamMap() = default;
  ParamMap(std::initializer_list<Param> params) : params_(params) {}

  void set(std::string name, ParamValue value);
  const ParamValue* find(std::string_view name) const;
  double get_double(std::string_view name) const;
  std::int64_t get_int(std::string_view name) const;
  const std::string& get_string(std::string_view name) const;

  const std::vector<Param>& items() const { return params_; }
  std::string to_string() const;
  bool operator==(const ParamMap&) const = default;

 private:
  std::vector<Param> params_;
};

struct GridAxis {
  std::string name;
  std::vector<ParamValue> values;
};

/// Axes in enumeration order; the first axis varies slowest.
struct HyperParamGrid {
  std::vector<GridAxis> axes;

  std::size_t size() const;
  /// Cartesian product in enumeration order.
  std::vector<ParamMap> expand() const;
};

/// The published grid for each estimator.
HyperParamGrid default_grid(EstimatorKind kind);

/// Axis names each estimator accepts, in grid order.
std::vector<std::string> grid_axis_names(EstimatorKind kind);

/// Checks that `params` names exactly the estimator's axes with in-domain values.
void validate_params(EstimatorKind kind, const ParamMap& params);

/// Fixed internal constants. Defaults are the documented values; the
/// experiment config may override them under "advanced".
struct SolverSettings {
  double logistic_tolerance = 1e-5;    // gradient max-norm
  int logistic_max_iterations = 500;   // iterations (lbfgs, newton-cg) or epochs (sag)
  int lbfgs_memory = 10;
  int newton_cg_max_inner = 50;
  int perceptron_epochs = 100;
  int linear_svc_epochs = 200;
  int boosting_max_depth = 3;

  bool operator==(const SolverSettings&) const = default;
};

}  // namespace uwbdetect
