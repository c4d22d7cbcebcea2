#include "uwbdetect/model_io.hpp"

#include <array>
#include <sstream>

#include "uwbdetect/binary_io.hpp"

namespace uwbdetect {

namespace {

constexpr std::array<char, 8> kMagic = {'U', 'W', 'B', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kMaxCount = 1u << 28;

std::uint32_t checked_count(BinaryReader& r) {
  const auto n = r.u32();
  if (n > kMaxCount) throw FormatError("model container count field out of range");
  return n;
}

void write_tree(BinaryWriter& w, const ClassificationTree& tree) {
  w.u32(static_cast<std::uint32_t>(tree.nodes().size()));
  for (const auto& n : tree.nodes()) {
    w.i32(n.feature);
    w.f64(n.threshold);
    w.i32(n.left);
    w.i32(n.right);
    w.i32(n.value);
  }
}

ClassificationTree read_tree(BinaryReader& r) {
  std::vector<TreeNode> nodes(checked_count(r));
  for (auto& n : nodes) {
    n.feature = r.i32();
    n.threshold = r.f64();
    n.left = r.i32();
    n.right = r.i32();
    n.value = r.i32();
  }
  return ClassificationTree(std::move(nodes));
}

void write_regression_tree(BinaryWriter& w, const RegressionTree& tree) {
  w.u32(static_cast<std::uint32_t>(tree.nodes().size()));
  for (const auto& n : tree.nodes()) {
    w.i32(n.feature);
    w.f64(n.threshold);
    w.i32(n.left);
    w.i32(n.right);
    w.f64(n.value);
  }
}

RegressionTree read_regression_tree(BinaryReader& r) {
  std::vector<RegressionNode> nodes(checked_count(r));
  for (auto& n : nodes) {
    n.feature = r.i32();
    n.threshold = r.f64();
    n.left = r.i32();
    n.right = r.i32();
    n.value = r.f64();
  }
  return RegressionTree(std::move(nodes));
}

}  // namespace

std::string encode_model(const TrainedModel& model) {
  std::ostringstream out(std::ios::binary);
  BinaryWriter w(out);
  w.bytes(kMagic);
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.kind));
  w.u32(static_cast<std::uint32_t>(model.params.index()));
  w.u64(model.n_features);
  w.u32(static_cast<std::uint32_t>(model.classes.size()));
  w.i32_array(model.classes);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          w.u32(static_cast<std::uint32_t>(m.weights.rows()));
          w.u32(static_cast<std::uint32_t>(m.weights.cols()));
          w.f64_array(m.weights.data());
          w.f64_array(m.bias);
        } else if constexpr (std::is_same_v<T, NeighborModel>) {
          w.u64(static_cast<std::uint64_t>(m.n_neighbors));
          w.u64(m.points.rows());
          w.u64(m.points.cols());
          w.f64_array(m.points.data());
          w.i32_array(m.targets);
        } else if constexpr (std::is_same_v<T, ClassificationTree>) {
          write_tree(w, m);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          w.u32(static_cast<std::uint32_t>(m.trees.size()));
          for (const auto& t : m.trees) write_tree(w, t);
        } else {
          w.u32(static_cast<std::uint32_t>(m.init.size()));
          w.f64_array(m.init);
          w.u32(static_cast<std::uint32_t>(m.stages.size()));
          for (const auto& stage : m.stages) {
            for (const auto& t : stage) write_regression_tree(w, t);
          }
        }
      },
      model.params);
  return out.str();
}

TrainedModel decode_model(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  BinaryReader r(in);
  std::array<char, 8> magic{};
  r.bytes(magic);
  if (magic != kMagic) throw FormatError("not a model file (bad magic)");
  if (const auto v = r.u32(); v != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(v));
  }
  TrainedModel model;
  const auto kind = r.u32();
  if (kind > static_cast<std::uint32_t>(EstimatorKind::gradient_boosting)) throw FormatError("unknown estimator kind");
  model.kind = static_cast<EstimatorKind>(kind);
  const auto tag = r.u32();
  model.n_features = r.u64();
  model.classes = r.i32_array(checked_count(r));
  switch (tag) {
    case 0: {
      const auto rows = checked_count(r);
      const auto cols = checked_count(r);
      LinearModel m{Matrix(rows, cols), {}};
      m.weights.data() = r.f64_array(static_cast<std::size_t>(rows) * cols);
      m.bias = r.f64_array(rows);
      model.params = std::move(m);
      break;
    }
    case 1: {
      NeighborModel m;
      m.n_neighbors = static_cast<std::int64_t>(r.u64());
      const auto rows = r.u64();
      const auto cols = r.u64();
      if (rows > kMaxCount || cols > kMaxCount || rows * cols > bytes.size()) throw FormatError("neighbor store truncated");
      m.points = Matrix(rows, cols);
      m.points.data() = r.f64_array(rows * cols);
      m.targets = r.i32_array(rows);
      model.params = std::move(m);
      break;
    }
    case 2:
      model.params = read_tree(r);
      break;
    case 3: {
      ForestModel m;
      const auto n = checked_count(r);
      for (std::uint32_t i = 0; i < n; ++i) m.trees.push_back(read_tree(r));
      model.params = std::move(m);
      break;
    }
    case 4: {
      BoostedModel m;
      const auto k = checked_count(r);
      m.init = r.f64_array(k);
      const auto stages = checked_count(r);
      for (std::uint32_t s = 0; s < stages; ++s) {
        std::vector<RegressionTree> stage;
        for (std::uint32_t c = 0; c < k; ++c) stage.push_back(read_regression_tree(r));
        m.stages.push_back(std::move(stage));
      }
      model.params = std::move(m);
      break;
    }
    default:
      throw FormatError("unknown model payload tag " + std::to_string(tag));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after model payload");
  return model;
}

void save_model(const std::string& path, const TrainedModel& model) {
  write_file_atomic(path, encode_model(model));
}

TrainedModel load_model(const std::string& path) { return decode_model(read_file(path)); }

}  // namespace uwbdetect
