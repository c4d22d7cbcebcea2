#include "uwbdetect/binary_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uwbdetect/common.hpp"

namespace uwbdetect {

static_assert(std::endian::native == std::endian::little,
              "containers are written in native order; big-endian hosts need byte swapping");

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw FormatError("unexpected end of binary data");
  }
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void BinaryWriter::bytes(std::span<const char> data) {
  out_.write(data.data(), static_cast<std::streamsize>(data.size()));
}
void BinaryWriter::u8(std::uint8_t v) { put(out_, v); }
void BinaryWriter::u32(std::uint32_t v) { put(out_, v); }
void BinaryWriter::u64(std::uint64_t v) { put(out_, v); }
void BinaryWriter::i32(std::int32_t v) { put(out_, v); }
void BinaryWriter::f64(double v) { put(out_, v); }
void BinaryWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes(s);
}
void BinaryWriter::f64_array(std::span<const double> values) {
  out_.write(reinterpret_cast<const char*>(values.data()),
             static_cast<std::streamsize>(values.size() * sizeof(double)));
}
void BinaryWriter::i32_array(std::span<const int> values) {
  for (int v : values) i32(v);
}

void BinaryReader::bytes(std::span<char> data) {
  in_.read(data.data(), static_cast<std::streamsize>(data.size()));
  if (in_.gcount() != static_cast<std::streamsize>(data.size())) {
    throw FormatError("unexpected end of binary data");
  }
}
std::uint8_t BinaryReader::u8() { return get<std::uint8_t>(in_); }
std::uint32_t BinaryReader::u32() { return get<std::uint32_t>(in_); }
std::uint64_t BinaryReader::u64() { return get<std::uint64_t>(in_); }
std::int32_t BinaryReader::i32() { return get<std::int32_t>(in_); }
double BinaryReader::f64() { return get<double>(in_); }
std::string BinaryReader::str() {
  const auto n = u32();
  if (n > (1u << 20)) throw FormatError("string field too long");
  std::string s(n, '\0');
  bytes(s);
  return s;
}
std::vector<double> BinaryReader::f64_array(std::size_t n) {
  std::vector<double> values(n);
  in_.read(reinterpret_cast<char*>(values.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
  if (in_.gcount() != static_cast<std::streamsize>(n * sizeof(double))) {
    throw FormatError("unexpected end of binary data");
  }
  return values;
}
std::vector<int> BinaryReader::i32_array(std::size_t n) {
  std::vector<int> values(n);
  for (auto& v : values) v = i32();
  return values;
}
bool BinaryReader::at_end() { return in_.peek() == std::char_traits<char>::eof(); }

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputNotFound(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace uwbdetect
