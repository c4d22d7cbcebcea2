#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uwbdetect/config.hpp"

namespace uwbdetect {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitMissingInput = 3,
  kExitEstimatorFailure = 4,
};

struct CommonOptions {
  std::string config_path;  // empty: built-in defaults
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::string data_type = "all";  // raw | baseband | motion_filtered | all
  int jobs = 0;                   // 0: OpenMP default
};

struct RunOptions : CommonOptions {
  std::vector<std::string> estimators;  // empty: from config
  bool save_models = false;
};

/// Loads the config (or defaults) and applies --out and --data-type.
ExperimentConfig resolve_config(const CommonOptions& options);

std::string dataset_path(const std::string& out_dir, const PlanEntry& entry, bool test);

/// Writes <out>/datasets/<id>_{train,test}.uwbd with .meta.json sidecars
/// and <out>/config.json. --seed replaces the top-level seed.
void cmd_generate(const CommonOptions& options, std::ostream& log);

/// Writes <out>/reports/<id>.json per dataset and <out>/aggregate.csv.
/// --seed replaces only the estimator seed. Returns false when any
/// estimator failed (the reports are still written).
bool cmd_run(const RunOptions& options, std::ostream& log);

/// Prints the ranking of <dir>/reports and writes <dir>/ranking.csv.
void cmd_report(const std::string& run_dir, std::ostream& out);

/// Full command line; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace uwbdetect
