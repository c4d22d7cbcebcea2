#include "uwbdetect/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "uwbdetect/binary_io.hpp"

namespace uwbdetect {

std::string_view to_string(DataType type) {
  switch (type) {
    case DataType::raw: return "raw";
    case DataType::baseband: return "baseband";
    case DataType::motion_filtered: return "motion_filtered";
  }
  return "?";
}

DataType data_type_from_string(std::string_view name) {
  if (name == "raw") return DataType::raw;
  if (name == "baseband") return DataType::baseband;
  if (name == "motion_filtered") return DataType::motion_filtered;
  throw InvalidInput("unknown data type '" + std::string(name) + "'");
}

std::vector<Label> distinct_labels(std::span<const Label> labels) {
  std::vector<Label> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.scans = scans.select_rows(indices);
  out.labels = select<Label>(labels, indices);
  out.scheme = scheme;
  out.data_type = data_type;
  out.scenario_id = scenario_id;
  out.frames = frames;
  out.standardized = standardized;
  return out;
}

void LabeledDataset::validate(bool require_stratifiable) const {
  if (frames == 0 || scans.cols() % frames != 0) throw InvalidInput("dataset frame layout is inconsistent");
  if (scans.rows() != labels.size()) throw InvalidInput("dataset has mismatched scan and label counts");
  const LabelScheme probe{scheme, {}, {}};
  for (Label l : labels) {
    if (!probe.valid_label(l)) {
      throw InvalidInput("label " + std::to_string(l) + " invalid for scheme " +
                         std::string(to_string(scheme)));
    }
  }
  for (double v : scans.data()) {
    if (!std::isfinite(v)) throw InvalidInput("dataset contains non-finite samples");
  }
  if (require_stratifiable) {
    std::array<std::size_t, 10> counts{};
    for (Label l : labels) ++counts[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 1) {
        throw InvalidInput("class " + std::to_string(c) + " has a single example; need at least 2");
      }
    }
  }
}

namespace {
constexpr std::array<char, 8> kMagic = {'U', 'W', 'B', 'D', 'S', 'E', 'T', '\0'};
}

std::string encode_dataset(const LabeledDataset& ds) {
  std::ostringstream out(std::ios::binary);
  BinaryWriter w(out);
  w.bytes(kMagic);
  w.u32(kDatasetFormatVersion);
  w.u64(ds.size());
  w.u32(static_cast<std::uint32_t>(ds.n_bins()));
  w.u32(ds.frames);
  w.u8(static_cast<std::uint8_t>(ds.scheme));
  w.u8(static_cast<std::uint8_t>(ds.data_type));
  w.u8(ds.standardized ? 1 : 0);
  w.u8(0);
  w.u64(ds.dropped);
  w.str(ds.scenario_id);
  w.f64_array(ds.scans.data());
  w.i32_array(ds.labels);
  return out.str();
}

LabeledDataset decode_dataset(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  BinaryReader r(in);
  std::array<char, 8> magic{};
  r.bytes(magic);
  if (magic != kMagic) throw FormatError("not a dataset file (bad magic)");
  const auto version = r.u32();
  if (version != kDatasetFormatVersion) {
    throw FormatError("unsupported dataset format version " + std::to_string(version));
  }
  LabeledDataset ds;
  const auto n = r.u64();
  const auto n_bins = r.u32();
  ds.frames = r.u32();
  const auto scheme = r.u8();
  const auto type = r.u8();
  if (scheme > 1 || type > 2 || ds.frames == 0) throw FormatError("corrupt dataset header");
  ds.scheme = static_cast<SchemeKind>(scheme);
  ds.data_type = static_cast<DataType>(type);
  ds.standardized = r.u8() != 0;
  r.u8();
  ds.dropped = r.u64();
  ds.scenario_id = r.str();
  const std::size_t cols = static_cast<std::size_t>(n_bins) * ds.frames;
  if (n > 0 && cols > bytes.size() / n / sizeof(double)) throw FormatError("dataset truncated");
  ds.scans = Matrix(n, cols);
  ds.scans.data() = r.f64_array(n * cols);
  ds.labels = r.i32_array(n);
  if (!r.at_end()) throw FormatError("trailing bytes after dataset payload");
  return ds;
}

void save_dataset(const std::string& path, const LabeledDataset& ds) {
  write_file_atomic(path, encode_dataset(ds));
}

LabeledDataset load_dataset(const std::string& path) { return decode_dataset(read_file(path)); }

}  // namespace uwbdetect
