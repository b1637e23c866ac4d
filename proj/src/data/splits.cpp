#include "locfair/data/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "locfair/error.hpp"
#include "locfair/rng.hpp"

namespace locfair::data {

namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = make_rng(seed, 0x5311);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace

Split split_indices(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError(fmt::format("split: test fraction {} outside (0, 1)", test_fraction));
  }
  const auto n_test =
      static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  if (n_test == 0 || n_test >= n) {
    throw ConfigError(fmt::format("split: {} rows with test fraction {} leaves an empty side", n,
                                  test_fraction));
  }
  const auto idx = shuffled(n, seed);
  Split s;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<Split> kfold_indices(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) {
    throw ConfigError(fmt::format("kfold: cannot make {} folds from {} rows", folds, n));
  }
  const auto idx = shuffled(n, seed);
  std::vector<Split> out(folds);
  std::size_t start = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t len = n / folds + (f < n % folds ? 1 : 0);
    for (std::size_t k = 0; k < n; ++k) {
      (k >= start && k < start + len ? out[f].test : out[f].train).push_back(idx[k]);
    }
    std::sort(out[f].train.begin(), out[f].train.end());
    std::sort(out[f].test.begin(), out[f].test.end());
    start += len;
  }
  return out;
}

}  // namespace locfair::data
