#pragma once

#include <cstddef>
#include <vector>

#include "locfair/autodiff/tensor.hpp"
#include "locfair/rng.hpp"

namespace locfair::nn {

struct MlpSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_dims;
  std::size_t output_dim = 1;
  double leaky_slope = 0.2;
  double dropout_p = 0.5;
  bool final_sigmoid = false;

  /// Throws ConfigError on zero dims or a dropout probability outside [0,1).
  void validate() const;
  bool operator==(const MlpSpec&) const = default;
};

/// Fully connected net: every hidden layer is Linear -> LeakyReLU -> Dropout,
/// then a final Linear, optionally followed by a sigmoid.
class Mlp {
 public:
  Mlp() = default;
  /// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
  Mlp(MlpSpec spec, Rng& rng);

  ad::Tensor forward(const ad::Tensor& x, bool train_mode, Rng& rng) const;

  const MlpSpec& spec() const { return spec_; }
  std::size_t layer_count() const { return weights_.size(); }
  const ad::Tensor& weight(std::size_t layer) const { return weights_.at(layer); }
  const ad::Tensor& bias(std::size_t layer) const { return biases_.at(layer); }

  /// Weight then bias for every layer, in order. Shares storage with the net.
  std::vector<ad::Tensor> params() const;
  void set_trainable(bool on);
  void zero_grad();
  std::size_t param_count() const;
  /// Deep copy (independent storage).
  Mlp clone() const;

  /// Rebuilds a network from stored spec and parameter values; used by
  /// checkpoint loading.
  static Mlp from_params(MlpSpec spec, std::vector<ad::Tensor> params);

 private:
  MlpSpec spec_;
  std::vector<ad::Tensor> weights_;
  std::vector<ad::Tensor> biases_;
};

/// Encoders F_a and F_z: input -> (10, 20) -> 20, no output activation.
MlpSpec encoder_spec(std::size_t input_dim);
/// Heads M_a, M_y, d and the leakage probe: 20 -> (10, 20) -> 1 with sigmoid.
MlpSpec head_spec();
/// Decoder G: 40 -> (20, 10) -> input_dim, no output activation.
MlpSpec decoder_spec(std::size_t input_dim);

inline constexpr std::size_t kEmbeddingDim = 20;

}  // namespace locfair::nn
