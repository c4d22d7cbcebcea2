#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "uwbdetect/modelsel.hpp"

namespace uwbdetect {

/// One run document: every EvalReport of one dataset.
struct RunReport {
  std::string dataset_id;
  std::vector<EvalReport> reports;
};

std::string run_report_to_json(const RunReport& run, int indent = 2);
RunReport run_report_from_json(std::string_view text);

/// Reads every "*.json" run document under `dir`. Throws InputNotFound when
/// the directory is missing or holds no reports.
std::vector<RunReport> load_run_reports(const std::filesystem::path& dir);

/// Datasets sorted by id, reports within a dataset in estimator order.
std::vector<RunReport> sort_runs(std::vector<RunReport> runs);

/// Wide table: one row per dataset, one test-accuracy column per estimator
/// present in any run. Failed or missing cells are empty. Timings are
/// excluded so the table is reproducible byte for byte.
std::string aggregate_csv(const std::vector<RunReport>& runs);

/// Reports of one dataset, best test accuracy first; estimator order breaks
/// ties and failed reports come last.
std::vector<EvalReport> rank_reports(const std::vector<EvalReport>& reports);

/// Long table: dataset,rank,estimator,test_accuracy,validation_accuracy,status.
std::string ranking_csv(const std::vector<RunReport>& runs);
/// Human-readable ranking, one block per dataset.
std::string ranking_text(const std::vector<RunReport>& runs);

}  // namespace uwbdetect
