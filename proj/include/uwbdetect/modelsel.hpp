#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uwbdetect/dataset.hpp"
#include "uwbdetect/estimators.hpp"

namespace uwbdetect {

struct SplitSpec {
  double train_fraction = 0.10;
  std::uint64_t seed = 0;
};

/// Per-class train/validation split; each class contributes
/// round(count * train_fraction) examples (clamped to [1, count - 1]) to train.
std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& dataset,
                                                           const SplitSpec& spec);

struct FoldAssignment {
  std::vector<int> fold;  // fold index per example
  int k = 5;

  std::vector<std::size_t> train_indices(int held_out) const;
  std::vector<std::size_t> test_indices(int held_out) const;
};

/// Every class is dealt round-robin over the k folds after a seeded shuffle,
/// each class starting where the previous one stopped. Per-class fold counts
/// differ by at most one.
FoldAssignment stratified_kfold(std::span<const Label> y, int k, std::uint64_t seed);

/// Accuracy of a model trained on all folds but i, scored on fold i.
std::vector<double> cross_val_scores(const EstimatorSpec& spec, const Matrix& X, std::span<const Label> y,
                                     const FoldAssignment& folds, Exec exec = Exec::parallel);

struct CandidateScore {
  ParamMap params;
  std::vector<double> fold_scores;
  double s_min = 0.0;

  double mean() const;
};

/// Index of the candidate with the largest minimum fold score; the earliest
/// candidate wins ties.
std::size_t select_best(std::span<const CandidateScore> candidates);

struct GridSearchResult {
  EstimatorSpec best;
  std::size_t best_index = 0;
  std::vector<CandidateScore> all;
};

/// Exhaustive search over the Cartesian product of `grid`. Every candidate is
/// fit with `seed`, so ensemble candidates that differ only in n_estimators
/// are nested; the parallel path exploits this by fitting the largest member
/// once per fold and scoring its prefixes. Exec::serial fits every candidate
/// independently and is the reference the parallel path must match exactly.
GridSearchResult grid_search(EstimatorKind kind, const HyperParamGrid& grid, const Matrix& X_train,
                             std::span<const Label> y_train, const FoldAssignment& folds,
                             std::uint64_t seed, const SolverSettings& settings = {},
                             Exec exec = Exec::parallel);

struct ConfusionMatrix {
  std::vector<Label> classes;
  std::vector<std::vector<std::int64_t>> counts;  // [true][predicted]

  static ConfusionMatrix build(std::span<const Label> classes, std::span<const Label> y_true,
                               std::span<const Label> y_pred);
  std::int64_t total() const;
  std::int64_t trace() const;
  double accuracy() const { return 100.0 * static_cast<double>(trace()) / static_cast<double>(total()); }
};

struct EvalReport {
  std::string dataset_id;
  EstimatorKind kind = EstimatorKind::k_nearest_neighbors;
  bool failed = false;
  std::string error;
  ParamMap selected_params;
  double selected_s_min = 0.0;
  double validation_accuracy = 0.0;
  double test_accuracy = 0.0;
  ConfusionMatrix confusion;  // on the test set
  double grid_search_ms = 0.0;
  double fit_ms = 0.0;
  double predict_ms = 0.0;
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::size_t n_test = 0;
  std::vector<CandidateScore> candidates;
};

struct ExperimentOptions {
  std::map<EstimatorKind, HyperParamGrid> grids;  // kinds not listed use default_grid
  SolverSettings settings;
  Exec exec = Exec::parallel;
  /// Receives each refit model (e.g. for saving); may be empty.
  std::function<void(const EvalReport&, const TrainedModel&)> on_model;
};

/// Split, grid search on the training part, refit, then score on the
/// validation part and on the independent test dataset. `seed` drives only
/// the estimators; the split and the folds follow split.seed.
std::vector<EvalReport> run_experiment(const LabeledDataset& dataset_train, const LabeledDataset& dataset_test,
                                       std::span<const EstimatorKind> kinds, const SplitSpec& split, int k,
                                       std::uint64_t seed, const ExperimentOptions& options = {});

/// Seed handed to every candidate of `kind` in one experiment.
std::uint64_t estimator_seed(std::uint64_t seed, EstimatorKind kind);
/// Seed of the fold assignment derived from a split seed.
std::uint64_t fold_seed(std::uint64_t split_seed);

}  // namespace uwbdetect
