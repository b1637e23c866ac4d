#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace locfair::data {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Shuffled train/test partition of [0, n). The test side gets
/// round(n * test_fraction) rows. Throws ConfigError when either side would be
/// empty or the fraction is outside (0, 1).
Split split_indices(std::size_t n, double test_fraction, std::uint64_t seed);

/// Shuffled k-fold partition: fold f tests on the f-th slice and trains on the
/// rest. The first n % folds slices are one row larger.
std::vector<Split> kfold_indices(std::size_t n, std::size_t folds, std::uint64_t seed);

}  // namespace locfair::data
