#include "uwbdetect/cli.hpp"

#include <exception>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <omp.h>

#include "uwbdetect/binary_io.hpp"
#include "uwbdetect/dataset_io.hpp"
#include "uwbdetect/model_io.hpp"
#include "uwbdetect/report.hpp"
#include "uwbdetect/sigproc.hpp"

namespace uwbdetect {

namespace fs = std::filesystem;

namespace {

int thread_count(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

// Runs body(i) for i in [0, n) on up to `jobs` threads; the exception of the
// lowest failing index is rethrown afterwards.
template <class F>
void parallel_jobs(std::size_t n, int jobs, F&& body) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count(jobs))
  for (std::size_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string sidecar_json(const ExperimentConfig& config, const PlanEntry& entry, const LabeledDataset& ds, bool test) {
  nlohmann::ordered_json j;
  j["dataset"] = entry.dataset_id();
  j["part"] = test ? "test" : "train";
  j["scenario"] = entry.scenario.id;
  j["scenario_site_seed"] = entry.scenario.seed;
  j["scheme"] = std::string(to_string(entry.scheme.kind));
  j["data_type"] = std::string(to_string(entry.data_type));
  j["dataset_seed"] = test ? entry.test_seed : entry.train_seed;
  j["n_examples"] = ds.size();
  j["n_bins"] = ds.n_bins();
  j["dropped"] = ds.dropped;
  j["config"] = nlohmann::ordered_json::parse(config_to_json(config));
  return j.dump(2) + "\n";
}

std::vector<EstimatorKind> parse_estimators(const std::vector<std::string>& names) {
  std::vector<EstimatorKind> kinds;
  for (const auto& n : names) {
    EstimatorKind k;
    try {
      k = estimator_kind_from_string(n);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("--estimators: ") + e.what());
    }
    if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
  }
  return kinds;
}

}  // namespace

ExperimentConfig resolve_config(const CommonOptions& options) {
  ExperimentConfig config = options.config_path.empty() ? default_config() : load_config(options.config_path);
  if (options.out_dir) config.output_dir = *options.out_dir;
  if (options.data_type != "all") {
    try {
      config.data_types = {data_type_from_string(options.data_type)};
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("--data-type: ") + e.what());
    }
  }
  if (options.jobs < 0) throw ConfigError("--jobs must be >= 0");
  config.validate();
  return config;
}

std::string dataset_path(const std::string& out_dir, const PlanEntry& entry, bool test) {
  return (fs::path(out_dir) / "datasets" / (entry.dataset_id() + (test ? "_test.uwbd" : "_train.uwbd"))).string();
}

void cmd_generate(const CommonOptions& options, std::ostream& log) {
  ExperimentConfig config = resolve_config(options);
  if (options.seed) config.seed = *options.seed;
  const auto plan = build_plan(config);

  // Every data type of a (scenario, scheme) pair comes from the same raw data.
  std::vector<std::vector<const PlanEntry*>> pairs;
  for (const auto& e : plan.entries) {
    if (pairs.empty() || pairs.back().front()->pair_index != e.pair_index) pairs.emplace_back();
    pairs.back().push_back(&e);
  }
  std::mutex log_mutex;
  parallel_jobs(pairs.size(), options.jobs, [&](std::size_t p) {
    const auto [raw_train, raw_test] = generate_pair(config, *pairs[p].front());
    for (const auto* entry : pairs[p]) {
      for (const bool test : {false, true}) {
        const auto& raw = test ? raw_test : raw_train;
        const LabeledDataset ds = entry->data_type == DataType::raw ? raw : derive_dataset(raw, entry->data_type);
        const std::string path = dataset_path(config.output_dir, *entry, test);
        save_dataset(path, ds);
        write_file_atomic(fs::path(path).replace_extension(".meta.json").string(),
                          sidecar_json(config, *entry, ds, test));
        std::lock_guard lock(log_mutex);
        log << "wrote " << path << " (" << ds.size() << " examples";
        if (ds.dropped) log << ", " << ds.dropped << " dropped";
        log << ")\n";
      }
    }
  });
  write_file_atomic((fs::path(config.output_dir) / "config.json").string(), config_to_json(config) + "\n");
}

bool cmd_run(const RunOptions& options, std::ostream& log) {
  ExperimentConfig config = resolve_config(options);
  if (!options.estimators.empty()) config.estimators = parse_estimators(options.estimators);
  auto plan = build_plan(config);
  if (options.seed) plan.run_seed = *options.seed;

  for (const auto& e : plan.entries) {
    for (const bool test : {false, true}) {
      const auto path = dataset_path(config.output_dir, e, test);
      if (!fs::is_regular_file(path)) throw InputNotFound(path);
    }
  }

  ExperimentOptions exp;
  exp.grids = config.grids;
  exp.settings = config.settings;
  const fs::path out(config.output_dir);
  if (options.save_models) {
    exp.on_model = [&](const EvalReport& r, const TrainedModel& m) {
      save_model((out / "models" / (r.dataset_id + "_" + std::string(short_name(r.kind)) + ".uwbm")).string(), m);
    };
  }

  std::vector<RunReport> runs(plan.entries.size());
  std::mutex log_mutex;
  parallel_jobs(plan.entries.size(), options.jobs, [&](std::size_t i) {
    const auto& e = plan.entries[i];
    const auto train = load_dataset(dataset_path(config.output_dir, e, false));
    const auto test = load_dataset(dataset_path(config.output_dir, e, true));
    runs[i].dataset_id = e.dataset_id();
    try {
      runs[i].reports = run_experiment(train, test, config.estimators,
                                       SplitSpec{config.train_fraction, plan.split_seed}, config.folds,
                                       plan.run_seed, exp);
    } catch (const InvalidInput& ex) {
      // Dataset-level problem (e.g. a class too small for the folds): every
      // estimator of this dataset fails, the other datasets still run.
      runs[i].reports.clear();
      for (auto kind : config.estimators) {
        EvalReport r;
        r.dataset_id = runs[i].dataset_id;
        r.kind = kind;
        r.failed = true;
        r.error = ex.what();
        runs[i].reports.push_back(std::move(r));
      }
    }
    write_file_atomic((out / "reports" / (runs[i].dataset_id + ".json")).string(), run_report_to_json(runs[i]));
    std::lock_guard lock(log_mutex);
    for (const auto& r : runs[i].reports) {
      log << runs[i].dataset_id << ' ' << short_name(r.kind) << ": ";
      if (r.failed) {
        log << "FAILED (" << r.error << ")\n";
      } else {
        log << "test " << format_double(r.test_accuracy) << "% valid " << format_double(r.validation_accuracy)
            << "% " << r.selected_params.to_string() << '\n';
      }
    }
  });
  write_file_atomic((out / "aggregate.csv").string(), aggregate_csv(runs));
  log << "wrote " << (out / "aggregate.csv").string() << '\n';

  for (const auto& run : runs) {
    for (const auto& r : run.reports) {
      if (r.failed) return false;
    }
  }
  return true;
}

void cmd_report(const std::string& run_dir, std::ostream& out) {
  const fs::path dir(run_dir);
  if (!fs::is_directory(dir)) throw InputNotFound(run_dir);
  // Either a run directory or its reports/ subdirectory.
  fs::path reports = dir / "reports";
  if (!fs::is_directory(reports)) {
    if (fs::exists(dir / "config.json")) throw InputNotFound(reports.string());
    reports = dir;
  }
  const auto runs = load_run_reports(reports);
  out << ranking_text(runs);
  write_file_atomic((dir / "ranking.csv").string(), ranking_csv(runs));
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic UWB radar obstacle detection experiments"};
  app.require_subcommand(1);

  CommonOptions gen;
  RunOptions run;
  std::string report_dir;

  auto add_common = [](CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config_path, "experiment config (JSON); defaults when omitted");
    sub->add_option("--out", o.out_dir, "output directory (overrides output_dir)");
    sub->add_option("--data-type", o.data_type, "data type to process")
        ->check(CLI::IsMember({"raw", "baseband", "motion_filtered", "all"}));
    sub->add_option("--jobs", o.jobs, "concurrent dataset runs (0: all cores)")->check(CLI::NonNegativeNumber);
  };

  auto* g = app.add_subcommand("generate", "synthesize train/test datasets for every plan entry");
  add_common(g, gen);
  g->add_option("--seed", gen.seed, "top-level seed (overrides the config)");

  auto* r = app.add_subcommand("run", "grid search, refit and score every estimator on every dataset");
  add_common(r, run);
  r->add_option("--seed", run.seed, "estimator seed (split and data unchanged)");
  r->add_option("--estimators", run.estimators, "comma-separated estimator list (e.g. kNN,RF)")->delimiter(',');
  r->add_flag("--save-models", run.save_models, "write refit models to <out>/models");

  auto* rep = app.add_subcommand("report", "rank estimators per dataset from a run directory");
  std::optional<std::string> report_out;
  rep->add_option("dir", report_dir, "run directory");
  rep->add_option("--out", report_out, "run directory (alternative to the positional argument)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (g->parsed()) {
      cmd_generate(gen, out);
    } else if (r->parsed()) {
      if (!cmd_run(run, out)) {
        err << "error: at least one estimator failed\n";
        return kExitEstimatorFailure;
      }
    } else {
      if (report_dir.empty() && report_out) report_dir = *report_out;
      if (report_dir.empty()) {
        err << "error: report needs a run directory\n";
        return kExitConfig;
      }
      cmd_report(report_dir, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InputNotFound& e) {
    err << "missing input: " << e.path() << '\n';
    return kExitMissingInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitOk;
}

}  // namespace uwbdetect
