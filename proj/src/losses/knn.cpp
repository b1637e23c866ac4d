#include "locfair/losses/knn.hpp"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

#include "locfair/error.hpp"

namespace locfair::losses {

KnnResult knn_same_label(std::span<const double> points, std::size_t dim,
                         std::span<const int> labels, std::size_t k) {
  if (k == 0) throw ConfigError("knn: K must be >= 1");
  if (dim == 0 || points.size() != labels.size() * dim) {
    throw ShapeError(fmt::format("knn: {} coordinates for {} rows of width {}", points.size(),
                                 labels.size(), dim));
  }
  const std::size_t n = labels.size();
  KnnResult out;
  out.neighbors.resize(n);
  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cand.clear();
    const double* pi = points.data() + i * dim;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || labels[j] != labels[i]) continue;
      const double* pj = points.data() + j * dim;
      double d2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double diff = pi[c] - pj[c];
        d2 += diff * diff;
      }
      cand.emplace_back(d2, j);
    }
    const std::size_t take = std::min(k, cand.size());
    if (take < k) ++out.shortfall_rows;
    // Pair ordering compares distance first, then index: lower index wins ties.
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
    auto& nb = out.neighbors[i];
    nb.reserve(take);
    for (std::size_t t = 0; t < take; ++t) nb.push_back(cand[t].second);
  }
  return out;
}

}  // namespace locfair::losses
