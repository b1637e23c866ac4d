#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "locfair/autodiff/tensor.hpp"
#include "locfair/rng.hpp"

namespace locfair::testsupport {

/// Central-difference step.
inline constexpr double kFiniteDiffStep = 1e-6;
/// Denominator floor of the relative error, so near-zero gradients are held to
/// an absolute bound of kRelErrorFloor * tolerance.
inline constexpr double kRelErrorFloor = 1e-4;

double relative_error(double analytic, double numeric);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // "leaf <i> entry <j>: analytic .. numeric .."
};

/// `scalar` rebuilds the objective from the current leaf values (it must be
/// deterministic, e.g. reseed any dropout generator inside). Every entry of
/// every leaf is compared against a central difference.
GradCheckResult check_gradients(const std::function<ad::Tensor()>& scalar,
                                const std::vector<ad::Tensor>& leaves,
                                double step = kFiniteDiffStep);

ad::Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                         double hi = 1.0, bool requires_grad = true);

std::vector<int> random_labels(std::size_t n, Rng& rng);      // {-1, +1}
std::vector<int> random_attributes(std::size_t n, Rng& rng);  // {0, 1}

}  // namespace locfair::testsupport
