#include "locfair/nn/mlp.hpp"

#include <cmath>

#include <fmt/format.h>

#include "locfair/autodiff/ops.hpp"
#include "locfair/error.hpp"

namespace locfair::nn {

void MlpSpec::validate() const {
  if (input_dim == 0 || output_dim == 0) {
    throw ConfigError(fmt::format("mlp: dims must be >= 1 (input {}, output {})", input_dim,
                                  output_dim));
  }
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw ConfigError("mlp: hidden layer of width 0");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw ConfigError(fmt::format("mlp: dropout probability {} outside [0, 1)", dropout_p));
  }
}

Mlp::Mlp(MlpSpec spec, Rng& rng) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t fan_in = spec_.input_dim;
  std::vector<std::size_t> widths = spec_.hidden_dims;
  widths.push_back(spec_.output_dim);
  for (std::size_t width : widths) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> w(fan_in * width);
    for (double& v : w) v = dist(rng);
    weights_.push_back(ad::Tensor::from(fan_in, width, std::move(w), true));
    biases_.push_back(ad::Tensor::zeros(1, width, true));
    fan_in = width;
  }
}

ad::Tensor Mlp::forward(const ad::Tensor& x, bool train_mode, Rng& rng) const {
  if (x.cols() != spec_.input_dim) {
    throw ShapeError(fmt::format("mlp forward: input has {} columns, network expects {}",
                                 x.cols(), spec_.input_dim));
  }
  ad::Tensor h = x;
  const std::size_t last = weights_.size() - 1;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = ad::add_bias(ad::matmul(h, weights_[l]), biases_[l]);
    if (l < last) {
      h = ad::leaky_relu(h, spec_.leaky_slope);
      h = ad::dropout(h, spec_.dropout_p, train_mode, rng);
    }
  }
  if (spec_.final_sigmoid) h = ad::sigmoid(h);
  return h;
}

std::vector<ad::Tensor> Mlp::params() const {
  std::vector<ad::Tensor> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(weights_[l]);
    out.push_back(biases_[l]);
  }
  return out;
}

void Mlp::set_trainable(bool on) {
  for (auto& p : params()) p.set_requires_grad(on);
}

void Mlp::zero_grad() {
  for (auto& p : params()) p.zero_grad();
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const auto& p : params()) n += p.size();
  return n;
}

Mlp Mlp::clone() const {
  std::vector<ad::Tensor> copies;
  for (const auto& p : params()) {
    auto c = p.detach();
    c.set_requires_grad(p.requires_grad());
    copies.push_back(std::move(c));
  }
  return from_params(spec_, std::move(copies));
}

Mlp Mlp::from_params(MlpSpec spec, std::vector<ad::Tensor> params) {
  spec.validate();
  Mlp net;
  net.spec_ = std::move(spec);
  const std::size_t layers = net.spec_.hidden_dims.size() + 1;
  if (params.size() != 2 * layers) {
    throw FormatError(fmt::format("mlp: expected {} parameter tensors, got {}", 2 * layers,
                                  params.size()));
  }
  std::size_t fan_in = net.spec_.input_dim;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t width =
        l + 1 < layers ? net.spec_.hidden_dims[l] : net.spec_.output_dim;
    auto& w = params[2 * l];
    auto& b = params[2 * l + 1];
    if (w.rows() != fan_in || w.cols() != width || b.rows() != 1 || b.cols() != width) {
      throw FormatError(fmt::format("mlp: layer {} parameters {} / {} do not match spec", l,
                                    w.shape_str(), b.shape_str()));
    }
    net.weights_.push_back(w);
    net.biases_.push_back(b);
    fan_in = width;
  }
  return net;
}

MlpSpec encoder_spec(std::size_t input_dim) {
  return MlpSpec{input_dim, {10, 20}, kEmbeddingDim, 0.2, 0.5, false};
}

MlpSpec head_spec() { return MlpSpec{kEmbeddingDim, {10, 20}, 1, 0.2, 0.5, true}; }

MlpSpec decoder_spec(std::size_t input_dim) {
  return MlpSpec{2 * kEmbeddingDim, {20, 10}, input_dim, 0.2, 0.5, false};
}

}  // namespace locfair::nn
