#include "uwbdetect/scan_synth.hpp"

#include <cmath>
#include <numbers>

namespace uwbdetect {

std::string_view to_string(Environment env) {
  return env == Environment::indoor ? "indoor" : "outdoor";
}

Environment environment_from_string(std::string_view name) {
  if (name == "indoor") return Environment::indoor;
  if (name == "outdoor") return Environment::outdoor;
  throw InvalidInput("unknown environment '" + std::string(name) + "'");
}

double PulseShape::operator()(double t_ns) const {
  if (std::abs(t_ns) > support_ns()) return 0.0;
  const double envelope = std::exp(-0.5 * (t_ns / width_ns) * (t_ns / width_ns));
  return envelope * std::cos(2.0 * std::numbers::pi * center_frequency_ghz * t_ns);
}

void Scenario::validate() const {
  if (n_bins < 64) throw InvalidInput("scenario '" + id + "': n_bins must be >= 64");
  if (!(bin_duration_ps > 0.0)) throw InvalidInput("scenario '" + id + "': bin_duration must be > 0");
  if (!(clutter_amplitude >= 0.0)) throw InvalidInput("scenario '" + id + "': clutter_amplitude must be >= 0");
  if (clutter_path_count < 0) throw InvalidInput("scenario '" + id + "': clutter_path_count must be >= 0");
  if (target_multipath_count < 0) {
    throw InvalidInput("scenario '" + id + "': target_multipath_count must be >= 0");
  }
  if (!(noise_sigma >= 0.0)) throw InvalidInput("scenario '" + id + "': noise_sigma must be >= 0");
  if (!(direct_path_amplitude > 0.0)) {
    throw InvalidInput("scenario '" + id + "': direct_path_amplitude must be > 0");
  }
  if (!(pulse.width_ns > 0.0 && pulse.center_frequency_ghz >= 0.0 && pulse.support_widths > 0.0)) {
    throw InvalidInput("scenario '" + id + "': invalid pulse shape");
  }
  if (!(range_exponent >= 0.0)) throw InvalidInput("scenario '" + id + "': range_exponent must be >= 0");
}

void validate_scenario_pair(const Scenario& indoor, const Scenario& outdoor) {
  if (!(indoor.clutter_amplitude > outdoor.clutter_amplitude &&
        indoor.clutter_path_count > outdoor.clutter_path_count)) {
    throw InvalidInput("indoor scenario '" + indoor.id +
                       "' must have more clutter (amplitude and path count) than outdoor '" +
                       outdoor.id + "'");
  }
}

ScanSynthesizer::ScanSynthesizer(Scenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
  static_profile_.assign(static_cast<std::size_t>(scenario_.n_bins), 0.0);
  add_pulse(static_profile_, 0.0, scenario_.direct_path_amplitude);

  // Clutter and multipath geometry are properties of the site: a function of
  // the scenario seed alone.
  Rng site(derive_seed(scenario_.seed, 0));
  const double first = scenario_.pulse.support_ns();
  const double last = scenario_.window_ns();
  for (int j = 0; j < scenario_.clutter_path_count; ++j) {
    const double delay = site.uniform(first, last);
    const double sign = site.uniform() < 0.5 ? -1.0 : 1.0;
    add_pulse(static_profile_, delay, sign * scenario_.clutter_amplitude * site.uniform(0.3, 1.0));
  }
}

std::vector<MultipathEcho> ScanSynthesizer::draw_multipath(Rng& rng) const {
  std::vector<MultipathEcho> echoes;
  for (int j = 0; j < scenario_.target_multipath_count; ++j) {
    const double extra = rng.uniform(0.5, 6.0);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    echoes.push_back({extra, sign * scenario_.clutter_amplitude * rng.uniform(0.3, 1.0)});
  }
  return echoes;
}

void ScanSynthesizer::add_pulse(std::vector<double>& samples, double delay_ns,
                                double amplitude) const {
  const double bin_ns = scenario_.bin_duration_ps * 1e-3;
  const double support = scenario_.pulse.support_ns();
  const long n = static_cast<long>(samples.size());
  const long lo = std::max(0L, static_cast<long>(std::ceil((delay_ns - support) / bin_ns)));
  const long hi = std::min(n - 1, static_cast<long>(std::floor((delay_ns + support) / bin_ns)));
  for (long i = lo; i <= hi; ++i) {
    samples[static_cast<std::size_t>(i)] += amplitude * scenario_.pulse(i * bin_ns - delay_ns);
  }
}

long ScanSynthesizer::delay_bin(double range_m) const {
  const double delay_ns = 2.0 * range_m / kSpeedOfLight * 1e9;
  return std::lround(delay_ns / (scenario_.bin_duration_ps * 1e-3));
}

double ScanSynthesizer::echo_amplitude(const TargetState& target) const {
  return target.reflectivity / std::pow(target.range_m, scenario_.range_exponent);
}

RadarScan ScanSynthesizer::synthesize(const std::optional<TargetState>& target,
                                      std::int64_t slow_time_index, Rng& rng,
                                      std::span<const MultipathEcho> multipath) const {
  RadarScan scan{static_profile_, slow_time_index, scenario_.id};
  if (target) {
    target->validate();
    if (!(target->range_m < scenario_.max_range_m())) {
      throw InvalidInput("target at " + std::to_string(target->range_m) +
                         " m lies outside the scan window of scenario '" + scenario_.id + "'");
    }
    const double range = target->range_m + target->jitter_sigma_m * rng.normal();
    const double delay_ns = 2.0 * range / kSpeedOfLight * 1e9;
    const double amplitude = echo_amplitude(*target);
    add_pulse(scan.samples, delay_ns, amplitude);
    for (const auto& echo : multipath) {
      add_pulse(scan.samples, delay_ns + echo.extra_delay_ns, amplitude * echo.gain);
    }
  }
  if (scenario_.noise_sigma > 0.0) {
    for (auto& s : scan.samples) s += scenario_.noise_sigma * rng.normal();
  }
  return scan;
}

RadarScan synthesize_scan(const Scenario& scenario, const std::optional<TargetState>& target,
                          std::int64_t slow_time_index, Rng& rng) {
  return ScanSynthesizer(scenario).synthesize(target, slow_time_index, rng);
}

TargetState place_target_for_label(Label label, const LabelScheme& scheme, Rng& rng,
                                   const TargetPrior& prior) {
  if (label == 0) throw InvalidInput("label 0 means no target; nothing to place");
  if (!scheme.valid_label(label)) {
    throw InvalidInput("label " + std::to_string(label) + " is not valid for scheme " +
                       std::string(to_string(scheme.kind)));
  }
  TargetState t;
  t.reflectivity = rng.uniform(prior.reflectivity_min, prior.reflectivity_max);
  t.jitter_sigma_m = prior.jitter_sigma_m;
  if (scheme.kind == SchemeKind::simple4) {
    const auto& z = scheme.zones;
    const double bounds[] = {z.min_range, z.r_high, z.r_med, z.r_low};
    t.range_m = rng.uniform(bounds[label - 1], bounds[label]);
    t.azimuth_rad = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
  } else {
    // Stay a hair inside the cell so the polar round trip cannot cross an edge.
    constexpr double margin = 1e-6;
    const auto& g = scheme.grid;
    const int row = (label - 1) / GridGeometry::kCols;
    const int col = (label - 1) % GridGeometry::kCols;
    const double x0 = g.origin_x + col * g.cell_width;
    const double y0 = g.origin_y + row * g.cell_height;
    const double x = rng.uniform(x0 + margin, x0 + g.cell_width - margin);
    const double y = rng.uniform(y0 + margin, y0 + g.cell_height - margin);
    t.range_m = std::hypot(x, y);
    t.azimuth_rad = std::atan2(x, y);
  }
  return t;
}

LabeledDataset generate_dataset(const Scenario& scenario, const LabelScheme& scheme,
                                int n_per_class, std::uint64_t seed, const TargetPrior& prior,
                                Exec exec) {
  if (n_per_class < 2) throw InvalidInput("n_per_class must be >= 2");
  scheme.validate();
  if (!(scheme.max_labeled_range() < scenario.max_range_m())) {
    throw InvalidInput("scheme '" + std::string(to_string(scheme.kind)) +
                       "' extends beyond the scan window of scenario '" + scenario.id + "'");
  }
  const ScanSynthesizer synth(scenario);
  const auto n_classes = static_cast<std::size_t>(scheme.n_classes());
  const std::size_t n = n_classes * static_cast<std::size_t>(n_per_class);
  const auto n_bins = static_cast<std::size_t>(scenario.n_bins);

  LabeledDataset ds;
  ds.scans = Matrix(n, kFramesPerExample * n_bins);
  ds.labels.resize(n);
  ds.scheme = scheme.kind;
  ds.data_type = DataType::raw;
  ds.scenario_id = scenario.id;
  ds.frames = kFramesPerExample;

  auto make_example = [&](std::size_t e) {
    const Label label = static_cast<Label>(e / static_cast<std::size_t>(n_per_class));
    Rng rng(derive_seed(seed, e));
    std::optional<TargetState> target;
    std::vector<MultipathEcho> multipath;
    if (label != 0) {
      target = place_target_for_label(label, scheme, rng, prior);
      multipath = synth.draw_multipath(rng);
    }
    auto row = ds.scans.row(e);
    for (std::uint32_t f = 0; f < kFramesPerExample; ++f) {
      const auto scan = synth.synthesize(target, static_cast<std::int64_t>(e * kFramesPerExample + f), rng, multipath);
      std::copy(scan.samples.begin(), scan.samples.end(), row.begin() + f * n_bins);
    }
    ds.labels[e] = label;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t e = 0; e < n; ++e) make_example(e);
  } else {
    for (std::size_t e = 0; e < n; ++e) make_example(e);
  }
  return ds;
}

}  // namespace uwbdetect
