#pragma once

#include <cstdint>
#include <vector>

#include "locfair/autodiff/tensor.hpp"

namespace locfair::ad {

struct AdamHyper {
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment estimates for one parameter tensor.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  static AdamState for_param(const Tensor& param);
};

/// One bias-corrected Adam update of `param` from its accumulated gradient.
/// Throws if the parameter carries no gradient or the state does not match.
void adam_step(Tensor& param, AdamState& state, double lr, const AdamHyper& hyper = {});

/// Learning rate for a 0-based epoch: 1e-3, decayed by 10x every 30 epochs.
double lr_at_epoch(int epoch);

/// Adam over a fixed list of parameters sharing one schedule.
class Adam {
 public:
  Adam() = default;
  explicit Adam(std::vector<Tensor> params, AdamHyper hyper = {});

  void step(double lr);
  void zero_grad();
  /// Drops all moment estimates and the step counter.
  void reset();

  const std::vector<Tensor>& params() const { return params_; }
  const std::vector<AdamState>& states() const { return states_; }
  std::vector<AdamState>& states() { return states_; }
  const AdamHyper& hyper() const { return hyper_; }

 private:
  std::vector<Tensor> params_;
  std::vector<AdamState> states_;
  AdamHyper hyper_;
};

}  // namespace locfair::ad
