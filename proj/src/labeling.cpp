#include "uwbdetect/labeling.hpp"

#include <cmath>
#include <numbers>

namespace uwbdetect {

double TargetState::x_m() const { return range_m * std::sin(azimuth_rad); }
double TargetState::y_m() const { return range_m * std::cos(azimuth_rad); }

void TargetState::validate() const {
  if (!(range_m > 0.0) || !std::isfinite(range_m)) throw InvalidInput("target range must be > 0");
  if (!(std::abs(azimuth_rad) <= std::numbers::pi / 2)) {
    throw InvalidInput("target azimuth must lie in [-pi/2, pi/2]");
  }
  if (!(reflectivity > 0.0)) throw InvalidInput("target reflectivity must be > 0");
  if (!(jitter_sigma_m >= 0.0)) throw InvalidInput("target jitter sigma must be >= 0");
}

std::string_view to_string(SchemeKind kind) {
  return kind == SchemeKind::simple4 ? "simple4" : "grid10";
}

SchemeKind scheme_kind_from_string(std::string_view name) {
  if (name == "simple4") return SchemeKind::simple4;
  if (name == "grid10") return SchemeKind::grid10;
  throw InvalidInput("unknown labeling scheme '" + std::string(name) + "'");
}

double LabelScheme::max_labeled_range() const {
  if (kind == SchemeKind::simple4) return zones.r_low;
  const double far_y = grid.origin_y + GridGeometry::kRows * grid.cell_height;
  const double far_x = std::max(std::abs(grid.origin_x),
                                std::abs(grid.origin_x + GridGeometry::kCols * grid.cell_width));
  return std::hypot(far_x, far_y);
}

void LabelScheme::validate() const {
  if (kind == SchemeKind::simple4) {
    if (!(zones.min_range >= 0.0 && zones.min_range < zones.r_high && zones.r_high > 0.0 &&
          zones.r_high < zones.r_med && zones.r_med < zones.r_low)) {
      throw InvalidInput("simple4 boundaries must satisfy 0 <= min_range < r_high < r_med < r_low");
    }
  } else {
    if (!(grid.cell_width > 0.0 && grid.cell_height > 0.0)) {
      throw InvalidInput("grid10 cells must have positive width and height");
    }
    if (!(grid.origin_y > 0.0)) throw InvalidInput("grid10 must start in front of the radar");
  }
}

Label simple_label(const std::optional<TargetState>& target, const LabelScheme& scheme) {
  if (!target) return 0;
  const double r = target->range_m;
  const auto& z = scheme.zones;
  if (r < z.r_high) return 1;
  if (r < z.r_med) return 2;
  if (r < z.r_low) return 3;
  return 0;
}

Label grid_label(const std::optional<TargetState>& target, const LabelScheme& scheme) {
  if (!target) return 0;
  const auto& g = scheme.grid;
  const double col_f = std::floor((target->x_m() - g.origin_x) / g.cell_width);
  const double row_f = std::floor((target->y_m() - g.origin_y) / g.cell_height);
  if (col_f < 0 || col_f >= GridGeometry::kCols || row_f < 0 || row_f >= GridGeometry::kRows) {
    return 0;
  }
  return 1 + static_cast<int>(row_f) * GridGeometry::kCols + static_cast<int>(col_f);
}

Label assign_label(const std::optional<TargetState>& target, const LabelScheme& scheme) {
  return scheme.kind == SchemeKind::simple4 ? simple_label(target, scheme)
                                            : grid_label(target, scheme);
}

}  // namespace uwbdetect
