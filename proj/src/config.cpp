#include "uwbdetect/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uwbdetect/rng.hpp"

namespace uwbdetect {

using nlohmann::json;

namespace {

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string element(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError((path.empty() ? std::string("config") : path) + ": expected an object");
}

void expect_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array");
}

void check_fields(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  expect_object(j, path);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown field '" + child(path, key) + "'");
    }
  }
}

void read(const json& j, const std::string& path, double& out) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  out = j.get<double>();
}

void read(const json& j, const std::string& path, int& out) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(path + ": integer out of range");
  }
  out = static_cast<int>(v);
}

void read(const json& j, const std::string& path, std::uint64_t& out) {
  if (!j.is_number_unsigned()) throw ConfigError(path + ": expected a non-negative integer");
  out = j.get<std::uint64_t>();
}

void read(const json& j, const std::string& path, std::string& out) {
  if (!j.is_string()) throw ConfigError(path + ": expected a string");
  out = j.get<std::string>();
}

template <class T>
void field(const json& obj, const std::string& path, std::string_view key, T& out) {
  const auto it = obj.find(std::string(key));
  if (it != obj.end()) read(*it, child(path, key), out);
}

// Converts a domain parse failure into a ConfigError naming the field.
template <class F>
auto named(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const InvalidInput& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

PulseShape read_pulse(const json& j, const std::string& path, PulseShape p) {
  check_fields(j, path, {"center_frequency_ghz", "width_ns", "support_widths"});
  field(j, path, "center_frequency_ghz", p.center_frequency_ghz);
  field(j, path, "width_ns", p.width_ns);
  field(j, path, "support_widths", p.support_widths);
  return p;
}

Scenario read_scenario(const json& j, const std::string& path) {
  check_fields(j, path,
               {"id", "environment", "n_bins", "bin_duration_ps", "clutter_amplitude", "clutter_path_count",
                "target_multipath_count", "noise_sigma", "direct_path_amplitude", "range_exponent", "pulse"});
  const auto env_it = j.find("environment");
  if (env_it == j.end()) throw ConfigError(child(path, "environment") + ": required");
  std::string env;
  read(*env_it, child(path, "environment"), env);
  Scenario s = named(child(path, "environment"), [&] { return environment_from_string(env); }) ==
                       Environment::indoor
                   ? default_indoor_scenario()
                   : default_outdoor_scenario();
  field(j, path, "id", s.id);
  field(j, path, "n_bins", s.n_bins);
  field(j, path, "bin_duration_ps", s.bin_duration_ps);
  field(j, path, "clutter_amplitude", s.clutter_amplitude);
  field(j, path, "clutter_path_count", s.clutter_path_count);
  field(j, path, "target_multipath_count", s.target_multipath_count);
  field(j, path, "noise_sigma", s.noise_sigma);
  field(j, path, "direct_path_amplitude", s.direct_path_amplitude);
  field(j, path, "range_exponent", s.range_exponent);
  if (j.contains("pulse")) s.pulse = read_pulse(j["pulse"], child(path, "pulse"), s.pulse);
  named(path, [&] { s.validate(); });
  return s;
}

ParamValue read_param_value(const json& j, const std::string& path, const ParamValue& like) {
  if (std::holds_alternative<std::string>(like)) {
    if (!j.is_string()) throw ConfigError(path + ": expected a string");
    return j.get<std::string>();
  }
  if (std::holds_alternative<std::int64_t>(like)) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return j.get<std::int64_t>();
  }
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

HyperParamGrid read_grid(EstimatorKind kind, const json& j, const std::string& path) {
  expect_object(j, path);
  HyperParamGrid grid = default_grid(kind);
  for (const auto& [key, value] : j.items()) {
    const auto it = std::find_if(grid.axes.begin(), grid.axes.end(), [&](const GridAxis& a) { return a.name == key; });
    if (it == grid.axes.end()) throw ConfigError("unknown field '" + child(path, key) + "'");
    const std::string axis_path = child(path, key);
    expect_array(value, axis_path);
    if (value.empty()) throw ConfigError(axis_path + ": must not be empty");
    const ParamValue like = it->values.front();
    std::vector<ParamValue> values;
    for (std::size_t i = 0; i < value.size(); ++i) {
      values.push_back(read_param_value(value[i], element(axis_path, i), like));
    }
    it->values = std::move(values);
  }
  for (const auto& candidate : grid.expand()) {
    named(path, [&] { validate_params(kind, candidate); });
  }
  return grid;
}

template <class T, class Parse>
std::vector<T> read_list(const json& j, const std::string& path, Parse parse) {
  expect_array(j, path);
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string s;
    read(j[i], element(path, i), s);
    const T v = named(element(path, i), [&] { return parse(s); });
    if (std::find(out.begin(), out.end(), v) != out.end()) throw ConfigError(element(path, i) + ": duplicate '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(path + ": must not be empty");
  return out;
}

json param_value_json(const ParamValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

json scenario_json(const Scenario& s) {
  return {{"id", s.id},
          {"environment", std::string(to_string(s.environment))},
          {"n_bins", s.n_bins},
          {"bin_duration_ps", s.bin_duration_ps},
          {"clutter_amplitude", s.clutter_amplitude},
          {"clutter_path_count", s.clutter_path_count},
          {"target_multipath_count", s.target_multipath_count},
          {"noise_sigma", s.noise_sigma},
          {"direct_path_amplitude", s.direct_path_amplitude},
          {"range_exponent", s.range_exponent},
          {"pulse",
           {{"center_frequency_ghz", s.pulse.center_frequency_ghz},
            {"width_ns", s.pulse.width_ns},
            {"support_widths", s.pulse.support_widths}}}};
}

}  // namespace

Scenario default_indoor_scenario() {
  Scenario s;
  s.id = "indoor";
  s.environment = Environment::indoor;
  s.clutter_amplitude = 0.6;
  s.clutter_path_count = 20;
  s.target_multipath_count = 8;
  s.noise_sigma = 0.02;
  return s;
}

Scenario default_outdoor_scenario() {
  Scenario s;
  s.id = "outdoor";
  s.environment = Environment::outdoor;
  s.clutter_amplitude = 0.05;
  s.clutter_path_count = 3;
  s.target_multipath_count = 1;
  s.noise_sigma = 0.003;
  return s;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.scenarios = {default_indoor_scenario(), default_outdoor_scenario()};
  return c;
}

LabelScheme ExperimentConfig::scheme(SchemeKind kind) const {
  return kind == SchemeKind::simple4 ? LabelScheme::simple4(zones) : LabelScheme::grid10(grid);
}

const Scenario& ExperimentConfig::scenario(std::string_view id) const {
  for (const auto& s : scenarios) {
    if (s.id == id) return s;
  }
  throw ConfigError("no scenario with id '" + std::string(id) + "'");
}

void ExperimentConfig::validate() const {
  if (n_per_class_train < 2) throw ConfigError("n_per_class.train: must be >= 2");
  if (n_per_class_test < 2) throw ConfigError("n_per_class.test: must be >= 2");
  if (scenarios.size() != 2) throw ConfigError("scenarios: expected exactly one indoor and one outdoor scenario");
  const Scenario* indoor = nullptr;
  const Scenario* outdoor = nullptr;
  for (const auto& s : scenarios) (s.environment == Environment::indoor ? indoor : outdoor) = &s;
  if (!indoor || !outdoor) throw ConfigError("scenarios: expected exactly one indoor and one outdoor scenario");
  if (indoor->id == outdoor->id) throw ConfigError("scenarios: ids must differ");
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    named(element("scenarios", i), [&] { scenarios[i].validate(); });
  }
  named("scenarios", [&] { validate_scenario_pair(*indoor, *outdoor); });
  if (schemes.empty()) throw ConfigError("schemes: must not be empty");
  for (const auto kind : schemes) named("geometry", [&] { scheme(kind).validate(); });
  for (const auto& s : scenarios) {
    for (const auto kind : schemes) {
      if (scheme(kind).max_labeled_range() >= s.max_range_m()) {
        throw ConfigError("scenario '" + s.id + "': scan window too short for the " +
                          std::string(to_string(kind)) + " geometry");
      }
    }
  }
  if (!(prior.reflectivity_min > 0.0 && prior.reflectivity_max >= prior.reflectivity_min)) {
    throw ConfigError("target_prior: need 0 < reflectivity_min <= reflectivity_max");
  }
  if (!(prior.jitter_sigma_m >= 0.0)) throw ConfigError("target_prior.jitter_sigma_m: must be >= 0");
  if (data_types.empty()) throw ConfigError("data_types: must not be empty");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("split.train_fraction: must be in (0, 1)");
  if (folds < 2) throw ConfigError("folds: must be >= 2");
  if (estimators.empty()) throw ConfigError("estimators: must not be empty");
  if (settings.logistic_tolerance <= 0.0 || settings.logistic_max_iterations < 1 || settings.lbfgs_memory < 1 ||
      settings.newton_cg_max_inner < 1 || settings.perceptron_epochs < 1 || settings.linear_svc_epochs < 1 ||
      settings.boosting_max_depth < 1) {
    throw ConfigError("advanced: solver settings must be positive");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is one past the offending character.
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }

  const std::string top;
  check_fields(root, top,
               {"seed", "output_dir", "n_per_class", "scenarios", "schemes", "geometry", "target_prior",
                "data_types", "split", "folds", "estimators", "grids", "advanced"});
  ExperimentConfig c = default_config();
  field(root, top, "seed", c.seed);
  field(root, top, "output_dir", c.output_dir);
  if (root.contains("n_per_class")) {
    const auto& j = root["n_per_class"];
    check_fields(j, "n_per_class", {"train", "test"});
    field(j, "n_per_class", "train", c.n_per_class_train);
    field(j, "n_per_class", "test", c.n_per_class_test);
  }
  if (root.contains("scenarios")) {
    const auto& j = root["scenarios"];
    expect_array(j, "scenarios");
    c.scenarios.clear();
    for (std::size_t i = 0; i < j.size(); ++i) c.scenarios.push_back(read_scenario(j[i], element("scenarios", i)));
  }
  if (root.contains("schemes")) {
    c.schemes = read_list<SchemeKind>(root["schemes"], "schemes", [](const std::string& s) { return scheme_kind_from_string(s); });
  }
  if (root.contains("geometry")) {
    const auto& g = root["geometry"];
    check_fields(g, "geometry", {"zones", "grid"});
    if (g.contains("zones")) {
      const auto& z = g["zones"];
      const std::string p = "geometry.zones";
      check_fields(z, p, {"r_high", "r_med", "r_low", "min_range"});
      field(z, p, "r_high", c.zones.r_high);
      field(z, p, "r_med", c.zones.r_med);
      field(z, p, "r_low", c.zones.r_low);
      field(z, p, "min_range", c.zones.min_range);
    }
    if (g.contains("grid")) {
      const auto& z = g["grid"];
      const std::string p = "geometry.grid";
      check_fields(z, p, {"origin_x", "origin_y", "cell_width", "cell_height"});
      field(z, p, "origin_x", c.grid.origin_x);
      field(z, p, "origin_y", c.grid.origin_y);
      field(z, p, "cell_width", c.grid.cell_width);
      field(z, p, "cell_height", c.grid.cell_height);
    }
  }
  if (root.contains("target_prior")) {
    const auto& j = root["target_prior"];
    const std::string p = "target_prior";
    check_fields(j, p, {"reflectivity_min", "reflectivity_max", "jitter_sigma_m"});
    field(j, p, "reflectivity_min", c.prior.reflectivity_min);
    field(j, p, "reflectivity_max", c.prior.reflectivity_max);
    field(j, p, "jitter_sigma_m", c.prior.jitter_sigma_m);
  }
  if (root.contains("data_types")) {
    c.data_types = read_list<DataType>(root["data_types"], "data_types", [](const std::string& s) { return data_type_from_string(s); });
  }
  if (root.contains("split")) {
    check_fields(root["split"], "split", {"train_fraction"});
    field(root["split"], "split", "train_fraction", c.train_fraction);
  }
  field(root, top, "folds", c.folds);
  if (root.contains("estimators")) {
    c.estimators = read_list<EstimatorKind>(root["estimators"], "estimators",
                                            [](const std::string& s) { return estimator_kind_from_string(s); });
  }
  if (root.contains("grids")) {
    const auto& j = root["grids"];
    expect_object(j, "grids");
    for (const auto& [key, value] : j.items()) {
      const std::string p = child("grids", key);
      const auto kind = named(p, [&] { return estimator_kind_from_string(key); });
      if (c.grids.count(kind)) throw ConfigError(p + ": estimator listed twice");
      c.grids[kind] = read_grid(kind, value, p);
    }
  }
  if (root.contains("advanced")) {
    const auto& j = root["advanced"];
    const std::string p = "advanced";
    check_fields(j, p,
                 {"logistic_tolerance", "logistic_max_iterations", "lbfgs_memory", "newton_cg_max_inner",
                  "perceptron_epochs", "linear_svc_epochs", "boosting_max_depth"});
    auto& s = c.settings;
    field(j, p, "logistic_tolerance", s.logistic_tolerance);
    field(j, p, "logistic_max_iterations", s.logistic_max_iterations);
    field(j, p, "lbfgs_memory", s.lbfgs_memory);
    field(j, p, "newton_cg_max_inner", s.newton_cg_max_inner);
    field(j, p, "perceptron_epochs", s.perceptron_epochs);
    field(j, p, "linear_svc_epochs", s.linear_svc_epochs);
    field(j, p, "boosting_max_depth", s.boosting_max_depth);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputNotFound(path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& c, int indent) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["n_per_class"] = {{"train", c.n_per_class_train}, {"test", c.n_per_class_test}};
  j["scenarios"] = json::array();
  for (const auto& s : c.scenarios) j["scenarios"].push_back(scenario_json(s));
  j["schemes"] = json::array();
  for (const auto k : c.schemes) j["schemes"].push_back(std::string(to_string(k)));
  j["geometry"] = {{"zones",
                    {{"r_high", c.zones.r_high},
                     {"r_med", c.zones.r_med},
                     {"r_low", c.zones.r_low},
                     {"min_range", c.zones.min_range}}},
                   {"grid",
                    {{"origin_x", c.grid.origin_x},
                     {"origin_y", c.grid.origin_y},
                     {"cell_width", c.grid.cell_width},
                     {"cell_height", c.grid.cell_height}}}};
  j["target_prior"] = {{"reflectivity_min", c.prior.reflectivity_min},
                       {"reflectivity_max", c.prior.reflectivity_max},
                       {"jitter_sigma_m", c.prior.jitter_sigma_m}};
  j["data_types"] = json::array();
  for (const auto t : c.data_types) j["data_types"].push_back(std::string(to_string(t)));
  j["split"] = {{"train_fraction", c.train_fraction}};
  j["folds"] = c.folds;
  j["estimators"] = json::array();
  for (const auto k : c.estimators) j["estimators"].push_back(std::string(short_name(k)));
  j["grids"] = json::object();
  for (const auto& [kind, grid] : c.grids) {
    json g = json::object();
    for (const auto& axis : grid.axes) {
      json values = json::array();
      for (const auto& v : axis.values) values.push_back(param_value_json(v));
      g[axis.name] = values;
    }
    j["grids"][std::string(short_name(kind))] = g;
  }
  const auto& s = c.settings;
  j["advanced"] = {{"logistic_tolerance", s.logistic_tolerance},
                   {"logistic_max_iterations", s.logistic_max_iterations},
                   {"lbfgs_memory", s.lbfgs_memory},
                   {"newton_cg_max_inner", s.newton_cg_max_inner},
                   {"perceptron_epochs", s.perceptron_epochs},
                   {"linear_svc_epochs", s.linear_svc_epochs},
                   {"boosting_max_depth", s.boosting_max_depth}};
  return j.dump(indent);
}

std::uint64_t scenario_site_seed(std::uint64_t seed, std::size_t scenario_index) {
  return derive_seed(derive_seed(seed, 1), scenario_index);
}

std::uint64_t dataset_seed(std::uint64_t seed, std::size_t pair_index, bool test) {
  return derive_seed(derive_seed(seed, 2), 2 * pair_index + (test ? 1 : 0));
}

std::uint64_t split_seed(std::uint64_t seed) { return derive_seed(seed, 3); }
std::uint64_t run_seed(std::uint64_t seed) { return derive_seed(seed, 4); }

std::string PlanEntry::dataset_id() const {
  return scenario.id + "_" + std::string(to_string(scheme.kind)) + "_" + std::string(to_string(data_type));
}

ExperimentPlan build_plan(const ExperimentConfig& config) {
  config.validate();
  ExperimentPlan plan;
  plan.split_seed = split_seed(config.seed);
  plan.run_seed = run_seed(config.seed);
  plan.output_dir = config.output_dir;
  for (std::size_t si = 0; si < config.scenarios.size(); ++si) {
    Scenario scenario = config.scenarios[si];
    scenario.seed = scenario_site_seed(config.seed, si);
    for (std::size_t ki = 0; ki < config.schemes.size(); ++ki) {
      const std::size_t pair = si * config.schemes.size() + ki;
      for (const auto type : config.data_types) {
        PlanEntry e;
        e.scenario = scenario;
        e.scheme = config.scheme(config.schemes[ki]);
        e.data_type = type;
        e.pair_index = pair;
        e.train_seed = dataset_seed(config.seed, pair, false);
        e.test_seed = dataset_seed(config.seed, pair, true);
        plan.entries.push_back(std::move(e));
      }
    }
  }
  return plan;
}

std::pair<LabeledDataset, LabeledDataset> generate_pair(const ExperimentConfig& config, const PlanEntry& entry,
                                                        Exec exec) {
  return {generate_dataset(entry.scenario, entry.scheme, config.n_per_class_train, entry.train_seed, config.prior, exec),
          generate_dataset(entry.scenario, entry.scheme, config.n_per_class_test, entry.test_seed, config.prior, exec)};
}

}  // namespace uwbdetect
