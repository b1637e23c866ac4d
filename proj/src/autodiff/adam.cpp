#include "locfair/autodiff/adam.hpp"

#include <cmath>

#include <fmt/format.h>

#include "locfair/error.hpp"

namespace locfair::ad {

AdamState AdamState::for_param(const Tensor& param) {
  AdamState s;
  s.m.assign(param.size(), 0.0);
  s.v.assign(param.size(), 0.0);
  return s;
}

void adam_step(Tensor& param, AdamState& state, double lr, const AdamHyper& hyper) {
  if (!param.has_grad()) {
    throw Error("adam_step: parameter " + param.shape_str() + " has no gradient");
  }
  if (state.m.size() != param.size() || state.v.size() != param.size()) {
    throw ShapeError(fmt::format("adam_step: state of size {} for parameter {}", state.m.size(),
                                 param.shape_str()));
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  const auto g = param.grad();
  auto w = param.mutable_values();
  for (std::size_t i = 0; i < w.size(); ++i) {
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * g[i];
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    w[i] -= lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
  }
}

double lr_at_epoch(int epoch) {
  if (epoch < 0) throw ConfigError(fmt::format("lr_at_epoch: negative epoch {}", epoch));
  return 1e-3 * std::pow(0.1, epoch / 30);
}

Adam::Adam(std::vector<Tensor> params, AdamHyper hyper)
    : params_(std::move(params)), hyper_(hyper) {
  reset();
}

void Adam::step(double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    // A parameter the loss never reached has a zero gradient.
    if (!params_[i].has_grad()) params_[i].mutable_grad();
    adam_step(params_[i], states_[i], lr, hyper_);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::reset() {
  states_.clear();
  for (const auto& p : params_) states_.push_back(AdamState::for_param(p));
}

}  // namespace locfair::ad
