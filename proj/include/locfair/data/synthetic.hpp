#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>

#include "locfair/data/encoder.hpp"
#include "locfair/rng.hpp"

namespace locfair::data {

struct SyntheticConfig {
  std::size_t n_train = 1000;
  std::size_t n_test = 500;
  std::size_t d = 25;
  double p_bias_train = 0.5;
  double p_bias_test = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Biased-label generator. Per sample: r, yo ~ Bernoulli(0.5); v ~ N(r, 1);
/// d draws u_r ~ N(v, 1); w ~ N(v, 1); vo ~ N(yo, 1); d draws u_yo ~ N(vo, 1).
/// x = (r, u_r..., u_yo...), a = r, y_r = sign(w), y_o = 2 yo - 1. Exactly
/// round(p_bias * n) uniformly chosen samples take y_r, the rest y_o.
EncodedDataset gen_synthetic_split(std::size_t n, std::size_t d, double p_bias, Rng& rng);

/// (train, test) drawn from independent streams of cfg.seed.
std::pair<EncodedDataset, EncodedDataset> gen_synthetic(const SyntheticConfig& cfg);

/// CSV text (with header) in the UCI Adult column layout, drawn from a
/// hand-built generative model in which income depends on education, age,
/// hours, marital status and directly on sex. Used as Adult-format test data
/// where the real file is unavailable.
std::string gen_adult_format_csv(std::size_t rows, std::uint64_t seed);

}  // namespace locfair::data
