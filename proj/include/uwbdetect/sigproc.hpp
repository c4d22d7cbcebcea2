#pragma once

#include <span>
#include <vector>

#include "uwbdetect/common.hpp"
#include "uwbdetect/dataset.hpp"

namespace uwbdetect {

/// Magnitude of the analytic signal (FFT, zero negative frequencies, double
/// positive ones, inverse FFT). Odd lengths are zero-padded by one sample
/// internally; output length equals input length.
std::vector<double> analytic_envelope(std::span<const double> scan);

/// Second-order slow-time difference: out[n] = t[n] - 2 t1[n] + t2[n],
/// where t1, t2 are the scans one and two steps older.
std::vector<double> motion_filter(std::span<const double> scan_t, std::span<const double> scan_t1,
                                  std::span<const double> scan_t2);

/// Zero-mean, unit population-std rescaling of one vector.
/// Throws DegenerateScan when the vector is (numerically) constant.
std::vector<double> standardize(std::span<const double> x);
void standardize_in_place(std::span<double> x);

/// Builds the requested representation from a raw triple-frame dataset and
/// standardizes every example; degenerate examples are dropped and counted.
LabeledDataset derive_dataset(const LabeledDataset& raw, DataType type, Exec exec = Exec::parallel);

}  // namespace uwbdetect
