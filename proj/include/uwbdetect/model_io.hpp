#pragma once

#include <string>

#include "uwbdetect/estimators.hpp"

namespace uwbdetect {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Self-describing binary model container, little-endian:
///
///   8 bytes  magic "UWBMODEL"
///   u32      format version (1)
///   u32      estimator kind (EstimatorKind ordinal)
///   u32      payload tag (0 linear, 1 neighbors, 2 tree, 3 forest, 4 boosted)
///   u64      n_features
///   u32 K, then K x i32 class labels
///   payload:
///     linear:    u32 rows, u32 cols, rows*cols f64 weights, rows f64 bias
///     neighbors: i64 n_neighbors, u64 rows, u64 cols, f64 points, rows i32 targets
///     tree:      u32 node count, per node {i32 feature, f64 threshold, i32 left, i32 right, i32 value}
///     forest:    u32 tree count, then trees as above
///     boosted:   u32 K, K f64 init, u32 stages, then stages*K regression trees,
///                each u32 node count + per node {i32 feature, f64 threshold, i32 left, i32 right, f64 value}
std::string encode_model(const TrainedModel& model);
TrainedModel decode_model(const std::string& bytes);

void save_model(const std::string& path, const TrainedModel& model);
TrainedModel load_model(const std::string& path);

}  // namespace uwbdetect
