#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace locfair::losses {

struct KnnResult {
  /// neighbors[i]: up to K rows sharing row i's label, nearest first.
  std::vector<std::vector<std::size_t>> neighbors;
  /// Rows that had fewer than K same-label candidates.
  std::size_t shortfall_rows = 0;
};

/// K nearest rows by Euclidean distance among rows with the same label,
/// excluding the row itself. Ties go to the lower row index. `points` is
/// row-major with `dim` columns.
KnnResult knn_same_label(std::span<const double> points, std::size_t dim,
                         std::span<const int> labels, std::size_t k);

}  // namespace locfair::losses
