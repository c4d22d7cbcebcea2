#include "uwbdetect/params.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "uwbdetect/common.hpp"

namespace uwbdetect {

std::string_view short_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::logistic_regression: return "LR";
    case EstimatorKind::perceptron: return "Per";
    case EstimatorKind::k_nearest_neighbors: return "kNN";
    case EstimatorKind::linear_svc: return "SVM";
    case EstimatorKind::decision_tree: return "DT";
    case EstimatorKind::random_forest: return "RF";
    case EstimatorKind::extra_trees: return "ET";
    case EstimatorKind::gradient_boosting: return "SGB";
  }
  return "?";
}

EstimatorKind estimator_kind_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  static const std::pair<const char*, EstimatorKind> aliases[] = {
      {"lr", EstimatorKind::logistic_regression},
      {"logistic_regression", EstimatorKind::logistic_regression},
      {"per", EstimatorKind::perceptron},
      {"perceptron", EstimatorKind::perceptron},
      {"knn", EstimatorKind::k_nearest_neighbors},
      {"k_nearest_neighbors", EstimatorKind::k_nearest_neighbors},
      {"svm", EstimatorKind::linear_svc},
      {"linear_svc", EstimatorKind::linear_svc},
      {"dt", EstimatorKind::decision_tree},
      {"decision_tree", EstimatorKind::decision_tree},
      {"rf", EstimatorKind::random_forest},
      {"random_forest", EstimatorKind::random_forest},
      {"et", EstimatorKind::extra_trees},
      {"extra_trees", EstimatorKind::extra_trees},
      {"sgb", EstimatorKind::gradient_boosting},
      {"gb", EstimatorKind::gradient_boosting},
      {"gradient_boosting", EstimatorKind::gradient_boosting},
  };
  for (const auto& [alias, kind] : aliases) {
    if (lower == alias) return kind;
  }
  throw InvalidInput("unknown estimator '" + std::string(name) + "'");
}

std::size_t kind_index(EstimatorKind kind) { return static_cast<std::size_t>(kind); }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_param(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
  return std::get<std::string>(v);
}

void ParamMap::set(std::string name, ParamValue value) {
  for (auto& p : params_) {
    if (p.name == name) {
      p.value = std::move(value);
      return;
    }
  }
  params_.push_back({std::move(name), std::move(value)});
}

const ParamValue* ParamMap::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p.value;
  }
  return nullptr;
}

double ParamMap::get_double(std::string_view name) const {
  const auto* v = find(name);
  if (!v) throw InvalidInput("missing parameter '" + std::string(name) + "'");
  if (const auto* d = std::get_if<double>(v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
  throw InvalidInput("parameter '" + std::string(name) + "' must be numeric");
}

std::int64_t ParamMap::get_int(std::string_view name) const {
  const auto* v = find(name);
  if (!v) throw InvalidInput("missing parameter '" + std::string(name) + "'");
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  throw InvalidInput("parameter '" + std::string(name) + "' must be an integer");
}

const std::string& ParamMap::get_string(std::string_view name) const {
  const auto* v = find(name);
  if (!v) throw InvalidInput("missing parameter '" + std::string(name) + "'");
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  throw InvalidInput("parameter '" + std::string(name) + "' must be a string");
}

std::string ParamMap::to_string() const {
  std::string out;
  for (const auto& p : params_) {
    if (!out.empty()) out += ", ";
    out += p.name + "=" + format_param(p.value);
  }
  return out;
}

std::size_t HyperParamGrid::size() const {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

std::vector<ParamMap> HyperParamGrid::expand() const {
  std::vector<ParamMap> out;
  const std::size_t total = size();
  out.reserve(total);
  std::vector<std::size_t> digit(axes.size(), 0);
  for (std::size_t c = 0; c < total; ++c) {
    ParamMap m;
    for (std::size_t a = 0; a < axes.size(); ++a) m.set(axes[a].name, axes[a].values[digit[a]]);
    out.push_back(std::move(m));
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++digit[a] < axes[a].values.size()) break;
      digit[a] = 0;
    }
  }
  return out;
}

namespace {

std::vector<ParamValue> doubles(std::initializer_list<double> v) { return {v.begin(), v.end()}; }
std::vector<ParamValue> strings(std::initializer_list<const char*> v) {
  std::vector<ParamValue> out;
  for (const char* s : v) out.emplace_back(std::string(s));
  return out;
}
std::vector<ParamValue> ints(std::initializer_list<std::int64_t> v) { return {v.begin(), v.end()}; }

const std::vector<ParamValue> kRegularization = doubles({0.001, 0.01, 0.1, 1, 10, 100, 1000});
const std::vector<ParamValue> kEnsembleSizes = ints({16, 32, 64, 128, 256});
const std::vector<ParamValue> kCriteria = strings({"gini", "entropy"});
const std::vector<ParamValue> kMaxFeatures = strings({"auto", "sqrt", "log2"});

}  // namespace

HyperParamGrid default_grid(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::logistic_regression:
      return {{{"C", kRegularization}, {"solver", strings({"lbfgs", "sag", "newton-cg"})}}};
    case EstimatorKind::perceptron:
      return {{{"alpha", doubles({0.0001, 0.001, 0.01, 0.1, 1})}}};
    case EstimatorKind::k_nearest_neighbors: {
      std::vector<ParamValue> n;
      for (std::int64_t k = 1; k <= 30; ++k) n.emplace_back(k);
      return {{{"n_neighbors", n}}};
    }
    case EstimatorKind::linear_svc:
      return {{{"C", kRegularization}}};
    case EstimatorKind::decision_tree:
      return {{{"criterion", kCriteria}, {"max_features", kMaxFeatures}}};
    case EstimatorKind::random_forest:
    case EstimatorKind::extra_trees:
      return {{{"n_estimators", kEnsembleSizes}, {"criterion", kCriteria}, {"max_features", kMaxFeatures}}};
    case EstimatorKind::gradient_boosting:
      return {{{"n_estimators", kEnsembleSizes}, {"learning_rate", doubles({0.2, 0.5, 0.8, 1.0})}}};
  }
  throw InvalidInput("unknown estimator kind");
}

std::vector<std::string> grid_axis_names(EstimatorKind kind) {
  std::vector<std::string> names;
  for (const auto& a : default_grid(kind).axes) names.push_back(a.name);
  return names;
}

namespace {

void check_positive(const ParamMap& p, const char* name) {
  const double v = p.get_double(name);
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string(name) + " must be > 0");
}

void check_choice(const ParamMap& p, const char* name, std::initializer_list<const char*> allowed) {
  const auto& v = p.get_string(name);
  for (const char* a : allowed) {
    if (v == a) return;
  }
  throw InvalidInput("parameter " + std::string(name) + " has unsupported value '" + v + "'");
}

}  // namespace

void validate_params(EstimatorKind kind, const ParamMap& params) {
  const auto names = grid_axis_names(kind);
  if (params.items().size() != names.size()) {
    throw InvalidInput(std::string(short_name(kind)) + " expects parameters {" + [&] {
      std::string s;
      for (const auto& n : names) s += (s.empty() ? "" : ", ") + n;
      return s;
    }() + "}, got {" + params.to_string() + "}");
  }
  for (const auto& n : names) {
    if (!params.find(n)) throw InvalidInput(std::string(short_name(kind)) + " is missing parameter '" + n + "'");
  }
  switch (kind) {
    case EstimatorKind::logistic_regression:
      check_positive(params, "C");
      check_choice(params, "solver", {"lbfgs", "sag", "newton-cg"});
      break;
    case EstimatorKind::perceptron: {
      const double a = params.get_double("alpha");
      if (!(a >= 0.0)) throw InvalidInput("alpha must be >= 0");
      break;
    }
    case EstimatorKind::k_nearest_neighbors:
      if (params.get_int("n_neighbors") < 1) throw InvalidInput("n_neighbors must be >= 1");
      break;
    case EstimatorKind::linear_svc:
      check_positive(params, "C");
      break;
    case EstimatorKind::random_forest:
    case EstimatorKind::extra_trees:
      if (params.get_int("n_estimators") < 1) throw InvalidInput("n_estimators must be >= 1");
      [[fallthrough]];
    case EstimatorKind::decision_tree:
      check_choice(params, "criterion", {"gini", "entropy"});
      check_choice(params, "max_features", {"auto", "sqrt", "log2"});
      break;
    case EstimatorKind::gradient_boosting:
      if (params.get_int("n_estimators") < 1) throw InvalidInput("n_estimators must be >= 1");
      check_positive(params, "learning_rate");
      break;
  }
}

}  // namespace uwbdetect
