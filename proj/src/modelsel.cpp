#include "uwbdetect/modelsel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "uwbdetect/rng.hpp"
#include "uwbdetect/sigproc.hpp"

namespace uwbdetect {

namespace {

std::map<Label, std::vector<std::size_t>> indices_by_class(std::span<const Label> y) {
  std::map<Label, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  return by_class;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

std::uint64_t estimator_seed(std::uint64_t seed, EstimatorKind kind) {
  return derive_seed(seed, 100 + kind_index(kind));
}

std::uint64_t fold_seed(std::uint64_t split_seed) { return derive_seed(split_seed, 1); }

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& dataset,
                                                           const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw InvalidInput("train_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> train, valid;
  for (auto& [label, members] : indices_by_class(dataset.labels)) {
    if (members.size() < 2) {
      throw InvalidInput("class " + std::to_string(label) + " has fewer than 2 examples; cannot split");
    }
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(label)));
    rng.shuffle(std::span<std::size_t>(members));
    const auto target = static_cast<std::size_t>(
        std::floor(static_cast<double>(members.size()) * spec.train_fraction + 0.5));
    const std::size_t n_train = std::clamp<std::size_t>(target, 1, members.size() - 1);
    train.insert(train.end(), members.begin(), members.begin() + static_cast<long>(n_train));
    valid.insert(valid.end(), members.begin() + static_cast<long>(n_train), members.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(valid.begin(), valid.end());
  return {dataset.subset(train), dataset.subset(valid)};
}

std::vector<std::size_t> FoldAssignment::train_indices(int held_out) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != held_out) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::test_indices(int held_out) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == held_out) out.push_back(i);
  }
  return out;
}

FoldAssignment stratified_kfold(std::span<const Label> y, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidInput("k must be at least 2");
  FoldAssignment out;
  out.k = k;
  out.fold.assign(y.size(), -1);
  auto by_class = indices_by_class(y);
  for (const auto& [label, members] : by_class) {
    if (members.size() < static_cast<std::size_t>(k)) {
      throw InvalidInput("class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                         " examples, fewer than k = " + std::to_string(k));
    }
  }
  std::size_t offset = 0;
  for (auto& [label, members] : by_class) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t j = 0; j < members.size(); ++j) {
      out.fold[members[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(k));
    }
    offset = (offset + members.size()) % static_cast<std::size_t>(k);
  }
  return out;
}

namespace {

double score_fold(const EstimatorSpec& spec, const Matrix& X, std::span<const Label> y,
                  const FoldAssignment& folds, int i) {
  const auto train = folds.train_indices(i);
  const auto test = folds.test_indices(i);
  const auto model = fit(spec, X.select_rows(train), select<Label>(y, train));
  return accuracy(select<Label>(y, test), predict(model, X.select_rows(test)));
}

}  // namespace

std::vector<double> cross_val_scores(const EstimatorSpec& spec, const Matrix& X, std::span<const Label> y,
                                     const FoldAssignment& folds, Exec exec) {
  if (folds.fold.size() != y.size() || X.rows() != y.size()) {
    throw InvalidInput("cross_val_scores: fold assignment does not match the data");
  }
  std::vector<double> scores(static_cast<std::size_t>(folds.k));
  if (exec == Exec::parallel) {
    std::vector<std::string> errors(scores.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < folds.k; ++i) {
      try {
        scores[static_cast<std::size_t>(i)] = score_fold(spec, X, y, folds, i);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(i)] = e.what();
      }
    }
    for (const auto& e : errors) {
      if (!e.empty()) throw Error(e);
    }
  } else {
    for (int i = 0; i < folds.k; ++i) scores[static_cast<std::size_t>(i)] = score_fold(spec, X, y, folds, i);
  }
  return scores;
}

double CandidateScore::mean() const {
  return std::accumulate(fold_scores.begin(), fold_scores.end(), 0.0) / static_cast<double>(fold_scores.size());
}

std::size_t select_best(std::span<const CandidateScore> candidates) {
  if (candidates.empty()) throw InvalidInput("select_best: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].s_min > candidates[best].s_min) best = i;
  }
  return best;
}

namespace {

void check_grid(EstimatorKind kind, const HyperParamGrid& grid) {
  if (grid.size() == 0) throw InvalidInput("grid_search: empty grid");
  const auto expected = grid_axis_names(kind);
  std::vector<std::string> got;
  for (const auto& a : grid.axes) got.push_back(a.name);
  if (got != expected) {
    std::string want;
    for (const auto& n : expected) want += (want.empty() ? "" : ", ") + n;
    throw InvalidInput("grid for " + std::string(short_name(kind)) + " must have axes [" + want + "]");
  }
}

// Candidates sharing every parameter but n_estimators.
std::vector<std::vector<std::size_t>> prefix_groups(EstimatorKind kind, std::span<const ParamMap> candidates) {
  std::vector<std::vector<std::size_t>> groups;
  if (!is_prefix_ensemble(kind)) {
    for (std::size_t c = 0; c < candidates.size(); ++c) groups.push_back({c});
    return groups;
  }
  std::vector<ParamMap> keys;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    ParamMap key;
    for (const auto& p : candidates[c].items()) {
      if (p.name != "n_estimators") key.set(p.name, p.value);
    }
    const auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      groups.push_back({c});
    } else {
      groups[static_cast<std::size_t>(it - keys.begin())].push_back(c);
    }
  }
  return groups;
}

}  // namespace

GridSearchResult grid_search(EstimatorKind kind, const HyperParamGrid& grid, const Matrix& X_train,
                             std::span<const Label> y_train, const FoldAssignment& folds,
                             std::uint64_t seed, const SolverSettings& settings, Exec exec) {
  check_grid(kind, grid);
  const auto candidates = grid.expand();
  for (const auto& c : candidates) validate_params(kind, c);
  const auto k = static_cast<std::size_t>(folds.k);
  auto spec_for = [&](const ParamMap& params) { return EstimatorSpec{kind, params, seed, settings}; };

  GridSearchResult result;
  result.all.resize(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    result.all[c].params = candidates[c];
    result.all[c].fold_scores.assign(k, 0.0);
  }

  if (exec == Exec::serial) {
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      result.all[c].fold_scores = cross_val_scores(spec_for(candidates[c]), X_train, y_train, folds, Exec::serial);
    }
  } else {
    const auto groups = prefix_groups(kind, candidates);
    const std::size_t units = groups.size() * k;
    std::vector<std::string> errors(units);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t u = 0; u < units; ++u) {
      const auto& group = groups[u / k];
      const int held_out = static_cast<int>(u % k);
      try {
        const auto train = folds.train_indices(held_out);
        const auto test = folds.test_indices(held_out);
        const Matrix X_fit = X_train.select_rows(train);
        const auto y_fit = select<Label>(y_train, train);
        const Matrix X_eval = X_train.select_rows(test);
        const auto y_eval = select<Label>(y_train, test);
        if (group.size() == 1) {
          const auto model = fit(spec_for(candidates[group[0]]), X_fit, y_fit);
          result.all[group[0]].fold_scores[static_cast<std::size_t>(held_out)] = accuracy(y_eval, predict(model, X_eval));
        } else {
          std::size_t largest = group[0];
          for (auto c : group) {
            if (candidates[c].get_int("n_estimators") > candidates[largest].get_int("n_estimators")) largest = c;
          }
          const auto full = fit(spec_for(candidates[largest]), X_fit, y_fit);
          for (auto c : group) {
            const auto members = static_cast<std::size_t>(candidates[c].get_int("n_estimators"));
            const auto model = truncate_ensemble(full, members);
            result.all[c].fold_scores[static_cast<std::size_t>(held_out)] = accuracy(y_eval, predict(model, X_eval));
          }
        }
      } catch (const std::exception& e) {
        errors[u] = e.what();
      }
    }
    for (const auto& e : errors) {
      if (!e.empty()) throw Error(e);
    }
  }

  for (auto& cs : result.all) cs.s_min = *std::min_element(cs.fold_scores.begin(), cs.fold_scores.end());
  result.best_index = select_best(result.all);
  result.best = spec_for(candidates[result.best_index]);
  return result;
}

ConfusionMatrix ConfusionMatrix::build(std::span<const Label> classes, std::span<const Label> y_true,
                                       std::span<const Label> y_pred) {
  if (y_true.size() != y_pred.size()) throw InvalidInput("confusion matrix: length mismatch");
  ConfusionMatrix cm;
  cm.classes.assign(classes.begin(), classes.end());
  cm.counts.assign(classes.size(), std::vector<std::int64_t>(classes.size(), 0));
  auto index_of = [&](Label l) {
    const auto it = std::lower_bound(cm.classes.begin(), cm.classes.end(), l);
    if (it == cm.classes.end() || *it != l) throw InvalidInput("confusion matrix: unknown label " + std::to_string(l));
    return static_cast<std::size_t>(it - cm.classes.begin());
  };
  for (std::size_t i = 0; i < y_true.size(); ++i) ++cm.counts[index_of(y_true[i])][index_of(y_pred[i])];
  return cm;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

namespace {

LabeledDataset standardized_copy(const LabeledDataset& ds) {
  if (ds.standardized) return ds;
  if (ds.frames != 1) throw InvalidInput("experiment datasets must hold one derived vector per example");
  LabeledDataset out = ds;
  for (std::size_t i = 0; i < out.size(); ++i) standardize_in_place(out.scans.row(i));
  out.standardized = true;
  return out;
}

}  // namespace

std::vector<EvalReport> run_experiment(const LabeledDataset& dataset_train, const LabeledDataset& dataset_test,
                                       std::span<const EstimatorKind> kinds, const SplitSpec& split, int k,
                                       std::uint64_t seed, const ExperimentOptions& options) {
  if (dataset_train.scheme != dataset_test.scheme || dataset_train.data_type != dataset_test.data_type ||
      dataset_train.scans.cols() != dataset_test.scans.cols() || dataset_train.frames != dataset_test.frames) {
    throw InvalidInput("train and test datasets differ in scheme, data type, or feature width");
  }
  const LabeledDataset train_all = standardized_copy(dataset_train);
  const LabeledDataset test = standardized_copy(dataset_test);
  train_all.validate();
  test.validate(false);

  const auto [train, valid] = stratified_split(train_all, split);
  const auto folds = stratified_kfold(train.labels, k, fold_seed(split.seed));
  const std::string dataset_id = std::string(train_all.scenario_id) + "_" + std::string(to_string(train_all.scheme)) +
                                 "_" + std::string(to_string(train_all.data_type));

  std::vector<Label> all_labels = train_all.labels;
  all_labels.insert(all_labels.end(), test.labels.begin(), test.labels.end());
  const auto classes = distinct_labels(all_labels);

  std::vector<EvalReport> reports;
  for (const auto kind : kinds) {
    EvalReport report;
    report.dataset_id = dataset_id;
    report.kind = kind;
    report.n_train = train.size();
    report.n_valid = valid.size();
    report.n_test = test.size();
    try {
      const auto it = options.grids.find(kind);
      const HyperParamGrid grid = it != options.grids.end() ? it->second : default_grid(kind);
      auto t0 = std::chrono::steady_clock::now();
      auto search = grid_search(kind, grid, train.scans, train.labels, folds, estimator_seed(seed, kind),
                                options.settings, options.exec);
      report.grid_search_ms = elapsed_ms(t0);
      report.selected_params = search.best.params;
      report.selected_s_min = search.all[search.best_index].s_min;
      report.candidates = std::move(search.all);

      t0 = std::chrono::steady_clock::now();
      const auto model = fit(search.best, train.scans, train.labels);
      report.fit_ms = elapsed_ms(t0);

      t0 = std::chrono::steady_clock::now();
      const auto valid_pred = predict(model, valid.scans);
      const auto test_pred = predict(model, test.scans);
      report.predict_ms = elapsed_ms(t0);

      report.validation_accuracy = accuracy(valid.labels, valid_pred);
      report.test_accuracy = accuracy(test.labels, test_pred);
      report.confusion = ConfusionMatrix::build(classes, test.labels, test_pred);
      if (options.on_model) options.on_model(report, model);
    } catch (const std::exception& e) {
      report.failed = true;
      report.error = e.what();
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace uwbdetect
