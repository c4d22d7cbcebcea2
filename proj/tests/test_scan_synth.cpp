#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "uwbdetect/dataset_io.hpp"
#include "uwbdetect/scan_synth.hpp"
#include "uwbdetect/sigproc.hpp"

namespace uwbdetect {
namespace {

Scenario quiet() {
  Scenario sc;
  sc.noise_sigma = 0.0;
  sc.clutter_path_count = 0;
  sc.target_multipath_count = 0;
  return sc;
}

TEST(Synthesize, EmptyQuietSceneIsDirectPathTemplate) {
  const Scenario sc = quiet();
  Rng rng(1);
  const auto scan = synthesize_scan(sc, std::nullopt, 0, rng);
  ASSERT_EQ(scan.samples.size(), std::size_t(sc.n_bins));
  const double bin_ns = sc.bin_duration_ps * 1e-3;
  for (int n = 0; n < sc.n_bins; ++n) {
    const double t = n * bin_ns;
    const double expect = t <= sc.pulse.support_ns() ? sc.direct_path_amplitude * sc.pulse(t) : 0.0;
    EXPECT_DOUBLE_EQ(scan.samples[n], expect) << n;
  }
  EXPECT_DOUBLE_EQ(scan.samples[0], 1.0);
}

TEST(Synthesize, Deterministic) {
  Scenario sc;
  TargetState t;
  t.range_m = 1.7;
  t.jitter_sigma_m = 0.03;
  Rng a(77), b(77);
  EXPECT_EQ(synthesize_scan(sc, t, 4, a).samples, synthesize_scan(sc, t, 4, b).samples);
}

TEST(Synthesize, TargetPeakAtDelayBin) {
  const Scenario sc = quiet();
  const double bin_m = kSpeedOfLight * sc.bin_duration_ps * 1e-12 / 2.0;
  for (int k : {100, 123, 250, 400}) {
    TargetState t;
    t.range_m = k * bin_m;
    Rng rng(k);
    const auto scan = synthesize_scan(sc, t, 0, rng);
    const long first = long(std::floor(sc.pulse.support_ns() / (sc.bin_duration_ps * 1e-3))) + 1;
    long best = first;
    for (long n = first; n < sc.n_bins; ++n) {
      if (std::abs(scan.samples[n]) > std::abs(scan.samples[best])) best = n;
    }
    EXPECT_EQ(best, std::lround(2.0 * t.range_m / (kSpeedOfLight * sc.bin_duration_ps * 1e-12))) << k;
    EXPECT_EQ(best, k);
  }
}

TEST(Synthesize, TargetOutsideWindowRejected) {
  const Scenario sc;
  TargetState t;
  t.range_m = sc.max_range_m() + 0.01;
  Rng rng(1);
  EXPECT_THROW(synthesize_scan(sc, t, 0, rng), InvalidInput);
}

TEST(Synthesize, ClutterIsStatic) {
  Scenario sc;
  sc.noise_sigma = 0.0;
  sc.clutter_path_count = 12;
  sc.clutter_amplitude = 0.5;
  const ScanSynthesizer synth(sc);
  Rng rng(3);
  const auto a = synth.synthesize(std::nullopt, 0, rng);
  const auto b = synth.synthesize(std::nullopt, 99, rng);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.samples, synth.static_profile());
  // Same scenario seed, same site.
  EXPECT_EQ(ScanSynthesizer(sc).static_profile(), synth.static_profile());
  sc.seed += 1;
  EXPECT_NE(ScanSynthesizer(sc).static_profile(), synth.static_profile());
}

TEST(Synthesize, EchoAmplitudeDecreasesWithRange) {
  const ScanSynthesizer synth{Scenario{}};
  TargetState t;
  double prev = INFINITY;
  for (double r = 0.3; r < 4.0; r += 0.1) {
    t.range_m = r;
    const double a = synth.echo_amplitude(t);
    EXPECT_LT(a, prev);
    prev = a;
  }
}

TEST(Synthesize, NoiseIsFreshPerScan) {
  Scenario sc;
  sc.noise_sigma = 0.1;
  const ScanSynthesizer synth(sc);
  Rng rng(8);
  const auto a = synth.synthesize(std::nullopt, 0, rng);
  const auto b = synth.synthesize(std::nullopt, 1, rng);
  EXPECT_NE(a.samples, b.samples);
}

TEST(ScenarioPair, IndoorMustBeMoreCluttered) {
  Scenario in, out;
  in.environment = Environment::indoor;
  in.clutter_amplitude = 0.5;
  in.clutter_path_count = 10;
  EXPECT_NO_THROW(validate_scenario_pair(in, out));
  in.clutter_path_count = out.clutter_path_count;
  EXPECT_THROW(validate_scenario_pair(in, out), InvalidInput);
  in.clutter_path_count = 10;
  in.clutter_amplitude = out.clutter_amplitude;
  EXPECT_THROW(validate_scenario_pair(in, out), InvalidInput);
}

TEST(ScenarioValidate, Bounds) {
  Scenario sc;
  sc.n_bins = 63;
  EXPECT_THROW(sc.validate(), InvalidInput);
  sc = Scenario{};
  sc.noise_sigma = -1;
  EXPECT_THROW(sc.validate(), InvalidInput);
  sc = Scenario{};
  sc.direct_path_amplitude = 0;
  EXPECT_THROW(sc.validate(), InvalidInput);
}

TEST(PlaceTarget, Simple4RangesWithinBand) {
  const auto scheme = LabelScheme::simple4();
  const double lo[] = {0, scheme.zones.min_range, scheme.zones.r_high, scheme.zones.r_med};
  const double hi[] = {0, scheme.zones.r_high, scheme.zones.r_med, scheme.zones.r_low};
  for (Label label = 1; label <= 3; ++label) {
    Rng rng(label);
    double mn = INFINITY, mx = -INFINITY;
    for (int i = 0; i < 1000; ++i) {
      const auto t = place_target_for_label(label, scheme, rng);
      mn = std::min(mn, t.range_m);
      mx = std::max(mx, t.range_m);
      EXPECT_EQ(simple_label(t, scheme), label);
      EXPECT_LE(std::abs(t.azimuth_rad), std::numbers::pi / 2);
    }
    EXPECT_GE(mn, lo[label]);
    EXPECT_LT(mx, hi[label]);
  }
}

TEST(PlaceTarget, Grid10RoundTrip) {
  const auto scheme = LabelScheme::grid10();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    for (Label label = 1; label <= 9; ++label) {
      EXPECT_EQ(grid_label(place_target_for_label(label, scheme, rng), scheme), label);
    }
  }
}

TEST(PlaceTarget, RejectsLabelZeroAndOutOfRange) {
  Rng rng(1);
  EXPECT_THROW(place_target_for_label(0, LabelScheme::simple4(), rng), InvalidInput);
  EXPECT_THROW(place_target_for_label(4, LabelScheme::simple4(), rng), InvalidInput);
  EXPECT_THROW(place_target_for_label(10, LabelScheme::grid10(), rng), InvalidInput);
}

TEST(GenerateDataset, BalancedCounts) {
  const auto s4 = generate_dataset(Scenario{}, LabelScheme::simple4(), 50, 1);
  EXPECT_EQ(s4.size(), 200u);
  const auto g10 = generate_dataset(Scenario{}, LabelScheme::grid10(), 20, 1);
  EXPECT_EQ(g10.size(), 200u);
  for (const auto* ds : {&s4, &g10}) {
    std::vector<int> counts(10, 0);
    for (Label l : ds->labels) ++counts[l];
    const int per = ds == &s4 ? 50 : 20;
    const int k = ds == &s4 ? 4 : 10;
    for (int c = 0; c < k; ++c) EXPECT_EQ(counts[c], per);
    EXPECT_EQ(ds->frames, kFramesPerExample);
    EXPECT_EQ(ds->data_type, DataType::raw);
    EXPECT_NO_THROW(ds->validate());
  }
  EXPECT_THROW(generate_dataset(Scenario{}, LabelScheme::simple4(), 1, 1), InvalidInput);
}

TEST(GenerateDataset, DeterministicBytesAndSerialEqualsParallel) {
  Scenario sc;
  sc.target_multipath_count = 3;
  const auto a = generate_dataset(sc, LabelScheme::grid10(), 6, 42, {}, Exec::parallel);
  const auto b = generate_dataset(sc, LabelScheme::grid10(), 6, 42, {}, Exec::serial);
  EXPECT_EQ(encode_dataset(a), encode_dataset(b));
  const auto c = generate_dataset(sc, LabelScheme::grid10(), 6, 43);
  EXPECT_NE(a.scans, c.scans);
}

// The scan depends on range only: a target and its mirror image across
// boresight produce the same scan from the same random stream.
TEST(GenerateDataset, MirroredTargetsGiveIdenticalScans) {
  const ScanSynthesizer synth{Scenario{}};
  const auto scheme = LabelScheme::grid10();
  for (Label left : {1, 4, 7}) {
    Rng place(left);
    auto t = place_target_for_label(left, scheme, place);
    auto mirrored = t;
    mirrored.azimuth_rad = -t.azimuth_rad;
    EXPECT_EQ(grid_label(mirrored, scheme), left + 2);
    Rng a(9), b(9);
    EXPECT_EQ(synth.synthesize(t, 0, a).samples, synth.synthesize(mirrored, 0, b).samples);
  }
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

TEST(GenerateDataset, MirroredCellsStatisticallyIndistinguishable) {
  const Scenario sc;
  const auto ds = derive_dataset(generate_dataset(sc, LabelScheme::grid10(), 300, 5), DataType::motion_filtered);
  // Energy-weighted mean delay bin of each motion-filtered example.
  auto centroid = [&](std::size_t i) {
    double w = 0.0, m = 0.0;
    for (std::size_t n = 0; n < ds.n_bins(); ++n) {
      const double e = ds.scans(i, n) * ds.scans(i, n);
      w += e;
      m += e * double(n);
    }
    return m / w;
  };
  auto feature = [&](Label label) {
    std::vector<double> out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] == label) out.push_back(centroid(i));
    }
    return out;
  };
  const double n = 300.0;
  const double critical = 1.63 * std::sqrt(2.0 / n);  // alpha = 0.01
  for (Label left : {1, 4, 7}) {
    EXPECT_LT(ks_statistic(feature(left), feature(left + 2)), critical) << left;
  }
  // Control: different rows are distinguishable.
  EXPECT_GT(ks_statistic(feature(1), feature(7)), critical);
}

}  // namespace
}  // namespace uwbdetect
