#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "uwbdetect/common.hpp"
#include "uwbdetect/labeling.hpp"

namespace uwbdetect {

enum class DataType : std::uint8_t { raw = 0, baseband = 1, motion_filtered = 2 };

std::string_view to_string(DataType type);
DataType data_type_from_string(std::string_view name);

/// Scans plus labels for one (scenario, scheme, data type).
///
/// Each row holds `frames` consecutive slow-time scans of `n_bins` samples,
/// oldest first: [t-2 | t-1 | t] for freshly generated raw data, a single
/// derived vector after processing.
struct LabeledDataset {
  Matrix scans;
  std::vector<Label> labels;
  SchemeKind scheme = SchemeKind::simple4;
  DataType data_type = DataType::raw;
  std::string scenario_id;
  std::uint32_t frames = 1;
  bool standardized = false;
  std::size_t dropped = 0;  // examples removed as degenerate while deriving

  std::size_t size() const { return labels.size(); }
  std::size_t n_bins() const { return frames == 0 ? 0 : scans.cols() / frames; }
  /// Most recent frame of example i.
  std::span<const double> latest_frame(std::size_t i) const {
    return scans.row(i).subspan((frames - 1) * n_bins(), n_bins());
  }

  LabeledDataset subset(std::span<const std::size_t> indices) const;

  /// Structural checks; with `require_stratifiable`, every class present
  /// must appear at least twice.
  void validate(bool require_stratifiable = true) const;
};

/// Sorted distinct labels.
std::vector<Label> distinct_labels(std::span<const Label> labels);

}  // namespace uwbdetect
