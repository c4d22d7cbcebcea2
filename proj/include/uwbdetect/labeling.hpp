#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "uwbdetect/common.hpp"

namespace uwbdetect {

/// Position and reflectivity of one person in front of the radar.
/// Azimuth 0 is boresight; positive azimuth is to the right of the radar.
struct TargetState {
  double range_m = 1.0;
  double azimuth_rad = 0.0;
  double reflectivity = 1.0;
  double jitter_sigma_m = 0.0;  // per-scan radial micro-motion

  double x_m() const;  // lateral offset, positive right
  double y_m() const;  // distance along boresight
  void validate() const;
};

enum class SchemeKind { simple4, grid10 };

std::string_view to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(std::string_view name);

/// Radial risk bands: [min_range, r_high) high, [r_high, r_med) medium,
/// [r_med, r_low) low. `min_range` only bounds target placement.
struct RadialZones {
  double r_high = 1.0;
  double r_med = 2.0;
  double r_low = 3.0;
  double min_range = 0.3;
};

/// 3x3 grid of equal cells; (origin_x, origin_y) is the near-left corner.
struct GridGeometry {
  double origin_x = -1.5;
  double origin_y = 0.5;
  double cell_width = 1.0;
  double cell_height = 1.0;
  static constexpr int kRows = 3;
  static constexpr int kCols = 3;
};

struct LabelScheme {
  SchemeKind kind = SchemeKind::simple4;
  RadialZones zones;
  GridGeometry grid;

  static LabelScheme simple4(RadialZones zones = {}) { return {SchemeKind::simple4, zones, {}}; }
  static LabelScheme grid10(GridGeometry grid = {}) { return {SchemeKind::grid10, {}, grid}; }

  int n_classes() const { return kind == SchemeKind::simple4 ? 4 : 10; }
  bool valid_label(Label label) const { return label >= 0 && label < n_classes(); }
  /// Largest range any labeled (non-zero) target can have.
  double max_labeled_range() const;
  void validate() const;
};

/// 0 for no person (or beyond r_low); 1/2/3 for high/medium/low risk.
Label simple_label(const std::optional<TargetState>& target, const LabelScheme& scheme);

/// 0 for no person or outside the grid; otherwise 1 + row*3 + col with
/// row 0 nearest the radar and col 0 leftmost.
Label grid_label(const std::optional<TargetState>& target, const LabelScheme& scheme);

/// Dispatches on scheme.kind.
Label assign_label(const std::optional<TargetState>& target, const LabelScheme& scheme);

}  // namespace uwbdetect
