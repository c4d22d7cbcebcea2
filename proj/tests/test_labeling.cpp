#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "uwbdetect/labeling.hpp"
#include "uwbdetect/rng.hpp"

namespace uwbdetect {
namespace {

TargetState at(double range, double azimuth = 0.0) {
  TargetState t;
  t.range_m = range;
  t.azimuth_rad = azimuth;
  return t;
}

TargetState at_xy(double x, double y) { return at(std::hypot(x, y), std::atan2(x, y)); }

TEST(SimpleLabel, Bands) {
  const auto s = LabelScheme::simple4();
  EXPECT_EQ(simple_label(std::nullopt, s), 0);
  EXPECT_EQ(simple_label(at(std::nextafter(1.0, 0.0)), s), 1);
  EXPECT_EQ(simple_label(at(1.0), s), 2);
  EXPECT_EQ(simple_label(at(2.0), s), 3);
  EXPECT_EQ(simple_label(at(2.999), s), 3);
  EXPECT_EQ(simple_label(at(3.0), s), 0);
  EXPECT_EQ(simple_label(at(4.0), s), 0);
  EXPECT_EQ(simple_label(at(0.1), s), 1);
}

TEST(SimpleLabel, AzimuthIrrelevant) {
  const auto s = LabelScheme::simple4();
  for (double az : {-1.5, -0.3, 0.0, 0.7, 1.5}) EXPECT_EQ(simple_label(at(1.5, az), s), 2);
}

TEST(SimpleLabel, MonotoneInRange) {
  const auto s = LabelScheme::simple4();
  Label prev = 1;
  for (double r = 0.05; r < 3.0; r += 0.01) {
    const Label l = simple_label(at(r), s);
    EXPECT_GE(l, prev);
    prev = l;
  }
}

TEST(GridLabel, Cells) {
  const auto s = LabelScheme::grid10();
  EXPECT_EQ(grid_label(std::nullopt, s), 0);
  // Default grid: x in [-1.5, 1.5), y in [0.5, 3.5), nearest row first.
  EXPECT_EQ(grid_label(at_xy(-1.0, 1.0), s), 1);
  EXPECT_EQ(grid_label(at_xy(0.0, 1.0), s), 2);
  EXPECT_EQ(grid_label(at_xy(1.0, 1.0), s), 3);
  EXPECT_EQ(grid_label(at_xy(-1.0, 2.0), s), 4);
  EXPECT_EQ(grid_label(at_xy(1.2, 3.4), s), 9);
  EXPECT_EQ(grid_label(at_xy(0.0, 0.2), s), 0);
  EXPECT_EQ(grid_label(at_xy(0.0, 3.6), s), 0);
  EXPECT_EQ(grid_label(at_xy(-1.6, 2.0), s), 0);
  EXPECT_EQ(grid_label(at_xy(1.6, 2.0), s), 0);
}

TEST(GridLabel, MirrorSwapsOuterColumns) {
  const auto s = LabelScheme::grid10();
  for (double y : {1.0, 2.0, 3.0}) {
    const Label l = grid_label(at_xy(-0.9, y), s);
    EXPECT_EQ(grid_label(at_xy(0.9, y), s), l + 2);
  }
}

TEST(Labels, Exhaustive) {
  Rng rng(3);
  const auto s4 = LabelScheme::simple4();
  const auto g10 = LabelScheme::grid10();
  for (int i = 0; i < 5000; ++i) {
    const auto t = at(rng.uniform(0.01, 6.0), rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2));
    EXPECT_TRUE(s4.valid_label(assign_label(t, s4)));
    EXPECT_TRUE(g10.valid_label(assign_label(t, g10)));
  }
}

TEST(LabelScheme, Validation) {
  auto s = LabelScheme::simple4({2.0, 1.0, 3.0, 0.3});
  EXPECT_THROW(s.validate(), InvalidInput);
  auto g = LabelScheme::grid10({-1.5, 0.5, 0.0, 1.0});
  EXPECT_THROW(g.validate(), InvalidInput);
  EXPECT_NO_THROW(LabelScheme::simple4().validate());
  EXPECT_NO_THROW(LabelScheme::grid10().validate());
  EXPECT_EQ(scheme_kind_from_string("grid10"), SchemeKind::grid10);
  EXPECT_THROW(scheme_kind_from_string("grid9"), InvalidInput);
}

TEST(TargetState, Validation) {
  EXPECT_THROW(at(0.0).validate(), InvalidInput);
  EXPECT_THROW(at(1.0, 2.0).validate(), InvalidInput);
  auto t = at(1.0);
  t.reflectivity = 0;
  EXPECT_THROW(t.validate(), InvalidInput);
}

}  // namespace
}  // namespace uwbdetect
