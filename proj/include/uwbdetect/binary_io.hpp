#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace uwbdetect {

/// Little-endian primitive writer used by the dataset and model containers.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void bytes(std::span<const char> data);
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i32(std::int32_t v);
  void f64(double v);
  void str(const std::string& s);
  void f64_array(std::span<const double> values);
  void i32_array(std::span<const int> values);

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  void bytes(std::span<char> data);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int32_t i32();
  double f64();
  std::string str();
  std::vector<double> f64_array(std::size_t n);
  std::vector<int> i32_array(std::size_t n);
  /// True when the stream has no bytes left.
  bool at_end();

 private:
  std::istream& in_;
};

/// Writes `contents` to `path` through a temporary sibling and a rename.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace uwbdetect
