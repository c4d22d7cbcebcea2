#include <algorithm>
#include <utility>

#include "uwbdetect/estimators.hpp"

namespace uwbdetect::detail {

std::vector<int> predict_neighbors(const NeighborModel& model, const Matrix& X, int n_classes) {
  const std::size_t n_train = model.points.rows();
  const auto k = static_cast<std::size_t>(std::min<std::int64_t>(model.n_neighbors, static_cast<std::int64_t>(n_train)));
  std::vector<int> out(X.rows());
  std::vector<std::pair<double, std::size_t>> dist(n_train);
  std::vector<int> votes(static_cast<std::size_t>(n_classes));

  for (std::size_t q = 0; q < X.rows(); ++q) {
    const auto x = X.row(q);
    for (std::size_t i = 0; i < n_train; ++i) {
      const auto p = model.points.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double diff = x[j] - p[j];
        s += diff * diff;
      }
      dist[i] = {s, i};
    }
    // Pair ordering breaks distance ties by lower training index.
    std::nth_element(dist.begin(), dist.begin() + static_cast<long>(k - 1), dist.end());
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t i = 0; i < k; ++i) ++votes[static_cast<std::size_t>(model.targets[dist[i].second])];
    out[q] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

}  // namespace uwbdetect::detail
