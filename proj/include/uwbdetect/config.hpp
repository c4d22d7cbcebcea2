#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "uwbdetect/dataset.hpp"
#include "uwbdetect/labeling.hpp"
#include "uwbdetect/modelsel.hpp"
#include "uwbdetect/params.hpp"
#include "uwbdetect/scan_synth.hpp"

namespace uwbdetect {

/// Bad or inconsistent experiment configuration. The message names the
/// offending field (e.g. "scenarios[1].noise_sigma") or the line and column
/// of a syntax error.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::string output_dir = "uwbdetect_out";
  int n_per_class_train = 200;
  int n_per_class_test = 200;
  std::vector<Scenario> scenarios;  // exactly one indoor and one outdoor
  std::vector<SchemeKind> schemes = {SchemeKind::simple4, SchemeKind::grid10};
  RadialZones zones;
  GridGeometry grid;
  TargetPrior prior;
  std::vector<DataType> data_types = {DataType::raw, DataType::baseband, DataType::motion_filtered};
  double train_fraction = 0.10;
  int folds = 5;
  std::vector<EstimatorKind> estimators{std::begin(kAllEstimators), std::end(kAllEstimators)};
  std::map<EstimatorKind, HyperParamGrid> grids;  // overrides only
  SolverSettings settings;

  LabelScheme scheme(SchemeKind kind) const;
  const Scenario& scenario(std::string_view id) const;
  void validate() const;
};

Scenario default_indoor_scenario();
Scenario default_outdoor_scenario();
ExperimentConfig default_config();

/// Parses JSON text. Unknown fields are rejected; omitted fields keep their
/// defaults.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config, int indent = 2);

/// Seeds of one (scenario, scheme) pair. Every data type of the pair is
/// derived from the same raw train and test datasets.
///
///   scenario site seed  = derive_seed(derive_seed(seed, 1), scenario index)
///   train dataset seed  = derive_seed(derive_seed(seed, 2), 2 * pair index)
///   test dataset seed   = derive_seed(derive_seed(seed, 2), 2 * pair index + 1)
///   split seed          = derive_seed(seed, 3)
///   estimator seed      = derive_seed(seed, 4)
///
/// where pair index = scenario index * n_schemes + scheme index.
std::uint64_t scenario_site_seed(std::uint64_t seed, std::size_t scenario_index);
std::uint64_t dataset_seed(std::uint64_t seed, std::size_t pair_index, bool test);
std::uint64_t split_seed(std::uint64_t seed);
std::uint64_t run_seed(std::uint64_t seed);

struct PlanEntry {
  Scenario scenario;  // site seed already applied
  LabelScheme scheme;
  DataType data_type = DataType::raw;
  std::size_t pair_index = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t test_seed = 0;

  /// "<scenario>_<scheme>_<data type>"
  std::string dataset_id() const;
};

struct ExperimentPlan {
  std::vector<PlanEntry> entries;  // scenario-major, then scheme, then data type
  std::uint64_t split_seed = 0;
  std::uint64_t run_seed = 0;
  std::string output_dir;
};

ExperimentPlan build_plan(const ExperimentConfig& config);

/// Raw train and test datasets of one (scenario, scheme) pair.
std::pair<LabeledDataset, LabeledDataset> generate_pair(const ExperimentConfig& config,
                                                        const PlanEntry& entry, Exec exec = Exec::parallel);

}  // namespace uwbdetect
