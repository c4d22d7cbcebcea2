#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "uwbdetect/report.hpp"

namespace uwbdetect {
namespace {

namespace fs = std::filesystem;

EvalReport fake_report(const std::string& id, EstimatorKind kind, Rng& rng) {
  EvalReport r;
  r.dataset_id = id;
  r.kind = kind;
  // Awkward decimals on purpose: the round trip must be exact.
  r.test_accuracy = 100.0 * double(rng.below(997)) / 997.0;
  r.validation_accuracy = rng.uniform() * 100.0;
  r.selected_s_min = 1.0 / 3.0;
  r.selected_params = default_grid(kind).expand().front();
  r.confusion = ConfusionMatrix::build(std::vector<Label>{0, 1}, std::vector<Label>{0, 1, 1}, std::vector<Label>{0, 0, 1});
  r.grid_search_ms = rng.uniform();
  r.fit_ms = 0.25;
  r.predict_ms = 1e-7;
  r.n_train = 20;
  r.n_valid = 180;
  r.n_test = 200;
  CandidateScore c;
  c.params = r.selected_params;
  c.fold_scores = {0.1, 75.0, 100.0 / 7.0};
  c.s_min = 0.1;
  r.candidates = {c};
  return r;
}

std::vector<RunReport> fake_runs(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RunReport> runs;
  for (const char* id : {"outdoor_simple4_motion_filtered", "indoor_grid10_raw", "indoor_simple4_baseband"}) {
    RunReport run{id, {}};
    for (auto kind : kAllEstimators) run.reports.push_back(fake_report(id, kind, rng));
    runs.push_back(run);
  }
  return runs;
}

void expect_same(const EvalReport& a, const EvalReport& b) {
  EXPECT_EQ(a.dataset_id, b.dataset_id);
  EXPECT_EQ(a.kind, b.kind);
  EXPECT_EQ(a.failed, b.failed);
  EXPECT_EQ(a.error, b.error);
  EXPECT_EQ(a.selected_params, b.selected_params);
  EXPECT_EQ(a.selected_s_min, b.selected_s_min);
  EXPECT_EQ(a.validation_accuracy, b.validation_accuracy);
  EXPECT_EQ(a.test_accuracy, b.test_accuracy);
  EXPECT_EQ(a.confusion.classes, b.confusion.classes);
  EXPECT_EQ(a.confusion.counts, b.confusion.counts);
  EXPECT_EQ(a.grid_search_ms, b.grid_search_ms);
  EXPECT_EQ(a.fit_ms, b.fit_ms);
  EXPECT_EQ(a.predict_ms, b.predict_ms);
  EXPECT_EQ(a.n_train, b.n_train);
  EXPECT_EQ(a.n_valid, b.n_valid);
  EXPECT_EQ(a.n_test, b.n_test);
  ASSERT_EQ(a.candidates.size(), b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    EXPECT_EQ(a.candidates[i].params, b.candidates[i].params);
    EXPECT_EQ(a.candidates[i].fold_scores, b.candidates[i].fold_scores);
    EXPECT_EQ(a.candidates[i].s_min, b.candidates[i].s_min);
  }
}

TEST(RunReportJson, RoundTripIsExact) {
  auto runs = fake_runs(1);
  runs[0].reports[3].failed = true;
  runs[0].reports[3].error = "boom \"quoted\"";
  for (const auto& run : runs) {
    const auto text = run_report_to_json(run);
    const auto back = run_report_from_json(text);
    EXPECT_EQ(back.dataset_id, run.dataset_id);
    ASSERT_EQ(back.reports.size(), run.reports.size());
    for (std::size_t i = 0; i < run.reports.size(); ++i) expect_same(back.reports[i], run.reports[i]);
    EXPECT_EQ(run_report_to_json(back), text);
  }
  EXPECT_THROW(run_report_from_json("{\"format\": \"other\"}"), FormatError);
  EXPECT_THROW(run_report_from_json("not json"), FormatError);
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

TEST(Aggregate, CellsEqualReportValuesExactly) {
  auto runs = fake_runs(2);
  runs[1].reports[5].failed = true;
  const auto rows = parse_csv(aggregate_csv(runs));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"dataset", "LR", "Per", "kNN", "SVM", "DT", "RF", "ET", "SGB"}));
  std::map<std::string, const RunReport*> by_id;
  for (const auto& r : runs) by_id[r.dataset_id] = &r;
  // Rows sorted by dataset id.
  EXPECT_EQ(rows[1][0], "indoor_grid10_raw");
  EXPECT_EQ(rows[3][0], "outdoor_simple4_motion_filtered");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 9u);
    const auto& run = *by_id.at(rows[i][0]);
    for (std::size_t k = 0; k < 8; ++k) {
      const auto& r = run.reports[k];
      if (r.failed) {
        EXPECT_EQ(rows[i][k + 1], "");
      } else {
        EXPECT_EQ(std::stod(rows[i][k + 1]), r.test_accuracy);
      }
    }
  }
}

TEST(Aggregate, OnlyPresentEstimatorColumns) {
  Rng rng(1);
  const std::vector<RunReport> runs{{"a", {fake_report("a", EstimatorKind::k_nearest_neighbors, rng)}}};
  EXPECT_EQ(parse_csv(aggregate_csv(runs))[0], (std::vector<std::string>{"dataset", "kNN"}));
}

TEST(Ranking, EightRowsPerDatasetOrderedByTestAccuracy) {
  auto runs = fake_runs(3);
  runs[2].reports[0].failed = true;
  const auto rows = parse_csv(ranking_csv(runs));
  ASSERT_EQ(rows.size(), 1u + 3 * 8);
  std::map<std::string, std::vector<std::vector<std::string>>> per;
  for (std::size_t i = 1; i < rows.size(); ++i) per[rows[i][0]].push_back(rows[i]);
  ASSERT_EQ(per.size(), 3u);
  for (const auto& [id, list] : per) {
    ASSERT_EQ(list.size(), 8u);
    for (std::size_t i = 0; i < list.size(); ++i) {
      EXPECT_EQ(list[i][1], std::to_string(i + 1));
      if (i > 0 && list[i][5] == "ok") EXPECT_GE(std::stod(list[i - 1][3]), std::stod(list[i][3]));
    }
  }
  EXPECT_EQ(per.at(runs[2].dataset_id).back()[5], "failed");
  EXPECT_EQ(per.at(runs[2].dataset_id).back()[2], "LR");
}

TEST(Ranking, TiesKeepEstimatorOrder) {
  Rng rng(1);
  std::vector<EvalReport> rs;
  for (auto kind : {EstimatorKind::extra_trees, EstimatorKind::perceptron, EstimatorKind::random_forest}) {
    rs.push_back(fake_report("a", kind, rng));
    rs.back().test_accuracy = 50.0;
  }
  const auto ranked = rank_reports(rs);
  EXPECT_EQ(ranked[0].kind, EstimatorKind::perceptron);
  EXPECT_EQ(ranked[1].kind, EstimatorKind::random_forest);
  EXPECT_EQ(ranked[2].kind, EstimatorKind::extra_trees);
}

TEST(Ranking, StableUnderReportFileOrder) {
  const auto runs = fake_runs(4);
  const auto base = fs::temp_directory_path() / "uwbdetect_report_test";
  fs::remove_all(base);
  // Same documents written under names that enumerate in opposite orders.
  for (int variant = 0; variant < 2; ++variant) {
    const auto dir = base / std::to_string(variant);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto name = variant == 0 ? std::to_string(i) : std::to_string(runs.size() - i);
      std::ofstream(dir / (name + ".json")) << run_report_to_json(runs[i]);
    }
  }
  auto reversed = runs;
  std::reverse(reversed.begin(), reversed.end());
  const auto a = load_run_reports(base / "0");
  const auto b = load_run_reports(base / "1");
  EXPECT_EQ(ranking_csv(a), ranking_csv(b));
  EXPECT_EQ(ranking_text(a), ranking_text(b));
  EXPECT_EQ(aggregate_csv(a), aggregate_csv(b));
  EXPECT_EQ(ranking_csv(runs), ranking_csv(reversed));
  EXPECT_EQ(ranking_csv(a), ranking_csv(runs));
}

TEST(Ranking, EmptyOrMissingDirectory) {
  const auto dir = fs::temp_directory_path() / "uwbdetect_report_empty";
  fs::remove_all(dir);
  EXPECT_THROW(load_run_reports(dir), InputNotFound);
  fs::create_directories(dir);
  EXPECT_THROW(load_run_reports(dir), InputNotFound);
}

}  // namespace
}  // namespace uwbdetect
