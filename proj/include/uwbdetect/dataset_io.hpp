#pragma once

#include <cstdint>
#include <string>

#include "uwbdetect/dataset.hpp"

namespace uwbdetect {

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

/// Binary dataset container, little-endian throughout:
///
///   offset  size  field
///   0       8     magic "UWBDSET\0"
///   8       4     u32 format version (1)
///   12      8     u64 n_examples
///   20      4     u32 n_bins
///   24      4     u32 frames per example
///   28      1     u8 scheme (0 simple4, 1 grid10)
///   29      1     u8 data type (0 raw, 1 baseband, 2 motion_filtered)
///   30      1     u8 standardized flag
///   31      1     reserved (0)
///   32      8     u64 examples dropped as degenerate
///   40      4     u32 scenario id length L
///   44      L     scenario id bytes
///   44+L    8*n_examples*frames*n_bins   f64 scan matrix, row-major
///   ...     4*n_examples                 i32 labels
std::string encode_dataset(const LabeledDataset& ds);
LabeledDataset decode_dataset(const std::string& bytes);

void save_dataset(const std::string& path, const LabeledDataset& ds);
LabeledDataset load_dataset(const std::string& path);

}  // namespace uwbdetect
