#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "uwbdetect/config.hpp"

namespace uwbdetect {
namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, DefaultPlanHasTwelveRuns) {
  const auto plan = build_plan(default_config());
  ASSERT_EQ(plan.entries.size(), 12u);
  std::set<std::string> ids;
  for (const auto& e : plan.entries) ids.insert(e.dataset_id());
  EXPECT_EQ(ids.size(), 12u);
  EXPECT_TRUE(ids.count("indoor_simple4_motion_filtered"));
  EXPECT_TRUE(ids.count("outdoor_grid10_raw"));
  // Four (scenario, scheme) pairs, three data types each sharing raw data.
  std::set<std::size_t> pairs;
  for (const auto& e : plan.entries) pairs.insert(e.pair_index);
  EXPECT_EQ(pairs.size(), 4u);
  for (const auto& e : plan.entries) {
    EXPECT_EQ(e.train_seed, dataset_seed(1, e.pair_index, false));
    EXPECT_EQ(e.test_seed, dataset_seed(1, e.pair_index, true));
    EXPECT_NE(e.train_seed, e.test_seed);
  }
  EXPECT_EQ(plan.split_seed, split_seed(1));
  EXPECT_EQ(plan.run_seed, run_seed(1));
}

TEST(Config, SeedDerivationMatchesDocumentedFormula) {
  for (std::uint64_t s : {0ull, 1ull, 12345ull}) {
    EXPECT_EQ(scenario_site_seed(s, 1), derive_seed(derive_seed(s, 1), 1));
    EXPECT_EQ(dataset_seed(s, 3, false), derive_seed(derive_seed(s, 2), 6));
    EXPECT_EQ(dataset_seed(s, 3, true), derive_seed(derive_seed(s, 2), 7));
    EXPECT_EQ(split_seed(s), derive_seed(s, 3));
    EXPECT_EQ(run_seed(s), derive_seed(s, 4));
  }
  auto c = default_config();
  c.seed = 9;
  const auto plan = build_plan(c);
  EXPECT_EQ(plan.entries.front().scenario.seed, scenario_site_seed(9, 0));
  EXPECT_EQ(plan.entries.back().scenario.seed, scenario_site_seed(9, 1));
}

TEST(Config, DefaultsAreValidAndPaired) {
  const auto c = default_config();
  EXPECT_NO_THROW(c.validate());
  EXPECT_NO_THROW(validate_scenario_pair(default_indoor_scenario(), default_outdoor_scenario()));
  EXPECT_EQ(c.train_fraction, 0.10);
  EXPECT_EQ(c.folds, 5);
  EXPECT_EQ(c.n_per_class_train, 200);
  EXPECT_EQ(c.estimators.size(), 8u);
}

TEST(Config, EmptyObjectGivesDefaults) {
  EXPECT_EQ(config_to_json(parse_config("{}")), config_to_json(default_config()));
}

TEST(Config, RoundTripThroughJson) {
  auto c = parse_config(R"({"seed": 42, "n_per_class": {"train": 60, "test": 12},
                            "data_types": ["motion_filtered"], "estimators": ["kNN", "RF"],
                            "grids": {"RF": {"n_estimators": [16, 32]}}, "folds": 4})");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.n_per_class_test, 12);
  EXPECT_EQ(c.folds, 4);
  ASSERT_EQ(c.estimators.size(), 2u);
  EXPECT_EQ(build_plan(c).entries.size(), 4u);
  const auto text = config_to_json(c);
  EXPECT_EQ(config_to_json(parse_config(text)), text);
}

TEST(Config, GridOverrideReplacesOnlyNamedAxes) {
  const auto c = parse_config(R"({"grids": {"RF": {"n_estimators": [8, 16]}, "LR": {"C": [1]}}})");
  const auto& rf = c.grids.at(EstimatorKind::random_forest);
  ASSERT_EQ(rf.axes.size(), 3u);
  EXPECT_EQ(rf.axes[0].values, (std::vector<ParamValue>{std::int64_t{8}, std::int64_t{16}}));
  EXPECT_EQ(rf.axes[1].values, default_grid(EstimatorKind::random_forest).axes[1].values);
  EXPECT_EQ(rf.size(), 12u);
  // Integer literal coerced to the axis type.
  EXPECT_EQ(c.grids.at(EstimatorKind::logistic_regression).axes[0].values, std::vector<ParamValue>{1.0});
}

TEST(Config, RejectsUnknownFieldsByPath) {
  EXPECT_EQ(config_error(R"({"seed": 1, "bogus": 2})"), "unknown field 'bogus'");
  EXPECT_EQ(config_error(R"({"n_per_class": {"train": 10, "validation": 3}})"),
            "unknown field 'n_per_class.validation'");
  EXPECT_NE(config_error(R"({"grids": {"RF": {"depth": [1]}}})").find("grids.RF.depth"), std::string::npos);
}

TEST(Config, SyntaxErrorReportsLineAndColumn) {
  EXPECT_EQ(config_error("{\"seed\": 1,\n \"folds\": }"), "syntax error at line 2, column 11");
  EXPECT_EQ(config_error("{"), "syntax error at line 1, column 2");
}

TEST(Config, FieldDiagnostics) {
  EXPECT_NE(config_error(R"({"folds": "five"})").find("folds"), std::string::npos);
  EXPECT_NE(config_error(R"({"folds": 1})").find("folds"), std::string::npos);
  EXPECT_NE(config_error(R"({"split": {"train_fraction": 1.5}})").find("split.train_fraction"), std::string::npos);
  EXPECT_NE(config_error(R"({"estimators": ["kNN", "XGB"]})").find("estimators[1]"), std::string::npos);
  EXPECT_NE(config_error(R"({"grids": {"kNN": {"n_neighbors": [0]}}})").find("grids.kNN"), std::string::npos);
  EXPECT_NE(config_error(R"({"scenarios": [{"id": "a"}]})").find("scenarios[0].environment"), std::string::npos);
}

TEST(Config, RequiresIndoorAndOutdoor) {
  EXPECT_NE(config_error(R"({"scenarios": [{"environment": "indoor"}, {"environment": "indoor", "id": "b"}]})")
                .find("indoor and one outdoor"),
            std::string::npos);
  // Indoor must be more cluttered than outdoor.
  EXPECT_FALSE(config_error(R"({"scenarios": [{"environment": "indoor", "clutter_amplitude": 0.01},
                                              {"environment": "outdoor"}]})")
                   .empty());
  EXPECT_TRUE(config_error(R"({"scenarios": [{"environment": "indoor"}, {"environment": "outdoor"}]})").empty());
}

TEST(Config, LoadFileNamesPath) {
  const auto dir = std::filesystem::temp_directory_path() / "uwbdetect_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "bad.json";
  std::ofstream(path) << R"({"sed": 1})";
  try {
    load_config(path);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()), path.string() + ": unknown field 'sed'");
  }
  EXPECT_THROW(load_config(dir / "absent.json"), InputNotFound);
}

}  // namespace
}  // namespace uwbdetect
