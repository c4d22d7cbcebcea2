#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "uwbdetect/binary_io.hpp"
#include "uwbdetect/dataset_io.hpp"
#include "uwbdetect/model_io.hpp"
#include "uwbdetect/scan_synth.hpp"
#include "uwbdetect/sigproc.hpp"

namespace uwbdetect {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("uwbdetect_io_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(BinaryIo, RoundTripsPrimitives) {
  std::ostringstream out;
  BinaryWriter w(out);
  w.u8(7);
  w.u32(0xdeadbeef);
  w.u64(~0ull);
  w.i32(-5);
  w.f64(-0.1);
  w.str("indoor");
  const std::string bytes = out.str();
  std::istringstream in(bytes);
  BinaryReader r(in);
  EXPECT_EQ(r.u8(), 7);
  EXPECT_EQ(r.u32(), 0xdeadbeefu);
  EXPECT_EQ(r.u64(), ~0ull);
  EXPECT_EQ(r.i32(), -5);
  EXPECT_EQ(r.f64(), -0.1);
  EXPECT_EQ(r.str(), "indoor");
  EXPECT_TRUE(r.at_end());
  EXPECT_THROW(r.u8(), FormatError);
  // Little-endian on disk.
  EXPECT_EQ(static_cast<unsigned char>(bytes[1]), 0xef);
}

TEST(DatasetIo, RoundTripRawAndDerived) {
  const auto raw = generate_dataset(Scenario{}, LabelScheme::grid10(), 3, 9);
  const auto mf = derive_dataset(raw, DataType::motion_filtered);
  for (const auto* ds : {&raw, &mf}) {
    const auto back = decode_dataset(encode_dataset(*ds));
    EXPECT_EQ(back.scans, ds->scans);
    EXPECT_EQ(back.labels, ds->labels);
    EXPECT_EQ(back.scheme, ds->scheme);
    EXPECT_EQ(back.data_type, ds->data_type);
    EXPECT_EQ(back.scenario_id, ds->scenario_id);
    EXPECT_EQ(back.frames, ds->frames);
    EXPECT_EQ(back.standardized, ds->standardized);
    EXPECT_EQ(back.dropped, ds->dropped);
    EXPECT_EQ(encode_dataset(back), encode_dataset(*ds));
  }
}

TEST(DatasetIo, RejectsCorruptContainers) {
  const auto bytes = encode_dataset(generate_dataset(Scenario{}, LabelScheme::simple4(), 2, 1));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_dataset(bad_magic), FormatError);
  EXPECT_THROW(decode_dataset(bytes.substr(0, bytes.size() - 3)), FormatError);
  EXPECT_THROW(decode_dataset(bytes + "x"), FormatError);
  auto bad_version = bytes;
  bad_version[8] = 9;
  EXPECT_THROW(decode_dataset(bad_version), FormatError);
}

TEST(DatasetIo, FileRoundTripAndMissingFile) {
  const auto dir = temp_dir("dataset");
  const auto ds = generate_dataset(Scenario{}, LabelScheme::simple4(), 2, 1);
  const auto path = (dir / "nested" / "a.uwbd").string();
  save_dataset(path, ds);
  EXPECT_EQ(encode_dataset(load_dataset(path)), encode_dataset(ds));
  for (const auto& e : fs::directory_iterator(dir / "nested")) EXPECT_EQ(e.path().extension(), ".uwbd");
  try {
    load_dataset((dir / "missing.uwbd").string());
    FAIL();
  } catch (const InputNotFound& e) {
    EXPECT_NE(e.path().find("missing.uwbd"), std::string::npos);
  }
}

Matrix features(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(n, d);
  for (auto& v : X.data()) v = rng.normal();
  return X;
}

TEST(ModelIo, EveryKindRoundTripsBitExactly) {
  const auto X = features(40, 6, 1);
  std::vector<Label> y;
  for (int i = 0; i < 40; ++i) y.push_back((i % 4) * 3);
  for (auto kind : kAllEstimators) {
    EstimatorSpec spec;
    spec.kind = kind;
    spec.seed = 3;
    const auto grid = default_grid(kind).expand();
    spec.params = grid[grid.size() / 2];
    if (kind == EstimatorKind::random_forest || kind == EstimatorKind::extra_trees ||
        kind == EstimatorKind::gradient_boosting) {
      spec.params.set("n_estimators", std::int64_t{16});
    }
    const auto model = fit(spec, X, y);
    const auto bytes = encode_model(model);
    const auto back = decode_model(bytes);
    EXPECT_EQ(back, model) << short_name(kind);
    EXPECT_EQ(encode_model(back), bytes);
    const auto Q = features(10, 6, 2);
    EXPECT_EQ(predict(back, Q), predict(model, Q));
    EXPECT_THROW(decode_model(bytes.substr(0, bytes.size() - 1)), FormatError);
  }
  EXPECT_THROW(decode_model("UWBDSET"), FormatError);
}

}  // namespace
}  // namespace uwbdetect
