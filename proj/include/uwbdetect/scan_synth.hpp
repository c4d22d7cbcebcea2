#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uwbdetect/common.hpp"
#include "uwbdetect/dataset.hpp"
#include "uwbdetect/labeling.hpp"
#include "uwbdetect/rng.hpp"

namespace uwbdetect {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

enum class Environment { indoor, outdoor };

std::string_view to_string(Environment env);
Environment environment_from_string(std::string_view name);

/// Gaussian-modulated sinusoid, truncated to +-support_widths * width.
struct PulseShape {
  double center_frequency_ghz = 4.3;
  double width_ns = 1.0;
  double support_widths = 5.0;

  double operator()(double t_ns) const;
  double support_ns() const { return support_widths * width_ns; }
};

struct Scenario {
  std::string id = "outdoor";
  Environment environment = Environment::outdoor;
  int n_bins = 480;
  double bin_duration_ps = 61.0;
  double clutter_amplitude = 0.05;
  int clutter_path_count = 3;
  /// Secondary copies of the target echo (person -> wall -> radar paths)
  /// per example, each with relative gain up to clutter_amplitude. Their
  /// delays depend on the person's pose and are drawn per example.
  int target_multipath_count = 1;
  double noise_sigma = 0.003;
  double direct_path_amplitude = 1.0;
  /// Echo amplitude = reflectivity / range^range_exponent.
  double range_exponent = 2.0;
  PulseShape pulse;
  std::uint64_t seed = 1;

  double window_ns() const { return n_bins * bin_duration_ps * 1e-3; }
  /// Largest target range whose echo delay falls inside the scan window.
  double max_range_m() const { return window_ns() * 1e-9 * kSpeedOfLight / 2.0; }
  void validate() const;
};

/// Indoor must be the more cluttered of the pair.
void validate_scenario_pair(const Scenario& indoor, const Scenario& outdoor);

/// Distribution of the per-person attributes that do not define the label.
struct TargetPrior {
  double reflectivity_min = 0.8;
  double reflectivity_max = 1.2;
  double jitter_sigma_m = 0.03;
};

/// Extra round-trip delay and relative gain of one target-induced echo.
struct MultipathEcho {
  double extra_delay_ns = 0.0;
  double gain = 0.0;
};

struct RadarScan {
  std::vector<double> samples;
  std::int64_t slow_time_index = 0;
  std::string scenario_id;
};

/// Precomputes the static part of a scenario (direct path and clutter) so
/// that repeated scans only add the target echo and noise.
class ScanSynthesizer {
 public:
  explicit ScanSynthesizer(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  /// Direct path plus clutter; identical for every slow-time index.
  const std::vector<double>& static_profile() const { return static_profile_; }

  RadarScan synthesize(const std::optional<TargetState>& target, std::int64_t slow_time_index,
                       Rng& rng, std::span<const MultipathEcho> multipath = {}) const;

  /// Draws target_multipath_count secondary echoes for one example.
  std::vector<MultipathEcho> draw_multipath(Rng& rng) const;

  /// Bin nearest to the round-trip delay of a target at `range_m`.
  long delay_bin(double range_m) const;
  double echo_amplitude(const TargetState& target) const;

 private:
  void add_pulse(std::vector<double>& samples, double delay_ns, double amplitude) const;

  Scenario scenario_;
  std::vector<double> static_profile_;
};

/// One scan. Throws InvalidInput when the target echo falls outside the window.
RadarScan synthesize_scan(const Scenario& scenario, const std::optional<TargetState>& target,
                          std::int64_t slow_time_index, Rng& rng);

/// Samples a target uniformly inside the zone or grid cell owning `label`.
TargetState place_target_for_label(Label label, const LabelScheme& scheme, Rng& rng,
                                   const TargetPrior& prior = {});

/// Balanced raw dataset: n_per_class examples of every label (including 0),
/// each a triple of consecutive scans. Example e draws from stream e of `seed`.
LabeledDataset generate_dataset(const Scenario& scenario, const LabelScheme& scheme,
                                int n_per_class, std::uint64_t seed,
                                const TargetPrior& prior = {}, Exec exec = Exec::parallel);

inline constexpr std::uint32_t kFramesPerExample = 3;

}  // namespace uwbdetect
