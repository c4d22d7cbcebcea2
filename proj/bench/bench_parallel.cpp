// Serial reference vs OpenMP paths on the three parallel kernels.
// Range argument 0 selects Exec::serial, 1 selects Exec::parallel.

#include <benchmark/benchmark.h>

#include "uwbdetect/config.hpp"
#include "uwbdetect/modelsel.hpp"
#include "uwbdetect/scan_synth.hpp"
#include "uwbdetect/sigproc.hpp"

namespace {

using namespace uwbdetect;

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

void label_exec(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

const LabeledDataset& raw_outdoor_grid10() {
  static const LabeledDataset ds =
      generate_dataset(default_outdoor_scenario(), LabelScheme::grid10(), 60, 1, {}, Exec::parallel);
  return ds;
}

void BM_GenerateDataset(benchmark::State& state) {
  const auto scenario = default_indoor_scenario();
  for (auto _ : state) {
    auto ds = generate_dataset(scenario, LabelScheme::simple4(), 100, 7, {}, exec_of(state));
    benchmark::DoNotOptimize(ds.scans.data().data());
  }
  label_exec(state);
}
BENCHMARK(BM_GenerateDataset)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DeriveBaseband(benchmark::State& state) {
  const auto& raw = raw_outdoor_grid10();
  for (auto _ : state) {
    auto ds = derive_dataset(raw, DataType::baseband, exec_of(state));
    benchmark::DoNotOptimize(ds.scans.data().data());
  }
  label_exec(state);
}
BENCHMARK(BM_DeriveBaseband)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GridSearch(benchmark::State& state, EstimatorKind kind) {
  static const LabeledDataset mf = derive_dataset(raw_outdoor_grid10(), DataType::motion_filtered);
  const auto folds = stratified_kfold(mf.labels, 5, 3);
  auto grid = default_grid(kind);
  if (kind == EstimatorKind::random_forest || kind == EstimatorKind::extra_trees) {
    grid.axes[0].values = {std::int64_t{16}, std::int64_t{32}, std::int64_t{64}};
  }
  for (auto _ : state) {
    auto result = grid_search(kind, grid, mf.scans, mf.labels, folds, 11, {}, exec_of(state));
    benchmark::DoNotOptimize(result.best_index);
  }
  label_exec(state);
}
BENCHMARK_CAPTURE(BM_GridSearch, kNN, EstimatorKind::k_nearest_neighbors)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GridSearch, DT, EstimatorKind::decision_tree)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_GridSearch, ET, EstimatorKind::extra_trees)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
