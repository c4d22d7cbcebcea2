#include "uwbdetect/sigproc.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>

namespace uwbdetect {

namespace {

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + ": non-finite input");
  }
}

// FFTW's planner is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per length and kept for the process.
class PlanCache {
 public:
  struct Plans {
    fftw_plan forward;
    fftw_plan inverse;
  };

  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  Plans get(int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<std::complex<double>> a(static_cast<std::size_t>(n)), b(a.size());
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans p{fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags),
            fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags)};
    plans_.emplace(n, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.inverse);
    }
  }

 private:
  std::mutex mutex_;
  std::map<int, Plans> plans_;
};

}  // namespace

std::vector<double> analytic_envelope(std::span<const double> scan) {
  require_finite(scan, "analytic_envelope");
  const std::size_t len = scan.size();
  if (len < 8) throw InvalidInput("analytic_envelope: need at least 8 samples");
  const std::size_t n = len + (len % 2);

  std::vector<std::complex<double>> buf(n, 0.0), spec(n);
  std::copy(scan.begin(), scan.end(), buf.begin());
  const auto plans = PlanCache::instance().get(static_cast<int>(n));
  fftw_execute_dft(plans.forward, reinterpret_cast<fftw_complex*>(buf.data()),
                   reinterpret_cast<fftw_complex*>(spec.data()));

  // DC and Nyquist keep weight 1, positive frequencies 2, negative 0.
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < half; ++k) spec[k] *= 2.0;
  for (std::size_t k = half + 1; k < n; ++k) spec[k] = 0.0;

  fftw_execute_dft(plans.inverse, reinterpret_cast<fftw_complex*>(spec.data()),
                   reinterpret_cast<fftw_complex*>(buf.data()));
  std::vector<double> env(len);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < len; ++i) env[i] = std::abs(buf[i]) * scale;
  return env;
}

std::vector<double> motion_filter(std::span<const double> scan_t, std::span<const double> scan_t1,
                                  std::span<const double> scan_t2) {
  if (scan_t.size() != scan_t1.size() || scan_t.size() != scan_t2.size()) {
    throw InvalidInput("motion_filter: scans must have equal lengths");
  }
  std::vector<double> out(scan_t.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = scan_t[i] - 2.0 * scan_t1[i] + scan_t2[i];
  }
  return out;
}

void standardize_in_place(std::span<double> x) {
  if (x.size() < 2) throw InvalidInput("standardize: need at least 2 samples");
  require_finite(x, "standardize");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  double peak = 0.0;
  for (double v : x) {
    mean += v;
    peak = std::max(peak, std::abs(v));
  }
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sigma = std::sqrt(var / n);
  // Relative floor: a constant vector can leave ~1 ulp of rounding in sigma.
  if (!(sigma > 1e-12 * peak) || peak == 0.0) {
    throw DegenerateScan("standardize: zero standard deviation (degenerate scan)");
  }
  for (double& v : x) v = (v - mean) / sigma;
}

std::vector<double> standardize(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  standardize_in_place(out);
  return out;
}

LabeledDataset derive_dataset(const LabeledDataset& raw, DataType type, Exec exec) {
  const std::size_t n_bins = raw.n_bins();
  if (type == DataType::motion_filtered && raw.frames < 3) {
    throw InvalidInput("derive_dataset: motion filtering needs three slow-time frames per example");
  }
  const std::size_t n = raw.size();
  Matrix derived(n, n_bins);
  std::vector<char> keep(n, 1);

  auto process = [&](std::size_t i) {
    const auto row = raw.scans.row(i);
    const std::size_t f = raw.frames;
    const auto frame = [&](std::size_t back) { return row.subspan((f - 1 - back) * n_bins, n_bins); };
    std::vector<double> v;
    switch (type) {
      case DataType::raw: v.assign(frame(0).begin(), frame(0).end()); break;
      case DataType::baseband: v = analytic_envelope(frame(0)); break;
      case DataType::motion_filtered: v = motion_filter(frame(0), frame(1), frame(2)); break;
    }
    try {
      standardize_in_place(v);
    } catch (const DegenerateScan&) {
      keep[i] = 0;
      return;
    }
    std::copy(v.begin(), v.end(), derived.row(i).begin());
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) process(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) process(i);
  }

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) kept.push_back(i);
  }
  LabeledDataset out;
  out.scans = derived.select_rows(kept);
  out.labels = select<Label>(raw.labels, kept);
  out.scheme = raw.scheme;
  out.data_type = type;
  out.scenario_id = raw.scenario_id;
  out.frames = 1;
  out.standardized = true;
  out.dropped = raw.dropped + (n - kept.size());
  return out;
}

}  // namespace uwbdetect
