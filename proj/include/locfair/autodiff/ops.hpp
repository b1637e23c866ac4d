#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "locfair/autodiff/tensor.hpp"
#include "locfair/rng.hpp"

namespace locfair::ad {

/// Predictions are clamped to [kBceClamp, 1 - kBceClamp] before the log.
inline constexpr double kBceClamp = 1e-7;

Tensor matmul(const Tensor& a, const Tensor& b);
/// a (n x m) plus row vector bias (1 x m) broadcast over rows.
Tensor add_bias(const Tensor& a, const Tensor& bias);
Tensor leaky_relu(const Tensor& a, double slope);
/// Inverted dropout: in train mode each entry is zeroed with probability p and
/// survivors are scaled by 1/(1-p). Identity in eval mode.
Tensor dropout(const Tensor& a, double p, bool train_mode, Rng& rng);
Tensor sigmoid(const Tensor& a);
Tensor concat_cols(const Tensor& a, const Tensor& b);

/// Mean binary cross-entropy of pred (n x 1) against 0/1 targets.
/// Throws NumericError for predictions outside [0,1] or NaN.
Tensor mean_bce(const Tensor& pred, std::span<const double> target);
/// Mean over rows of the per-row L1 distance sum_j |a_ij - b_ij|.
Tensor mean_l1(const Tensor& a, const Tensor& b);
/// Euclidean norm of every row, shape (n x 1). The subgradient at a zero row
/// is taken as zero.
Tensor l2_norm_rows(const Tensor& a);
/// sum_i weights[i] * a_i over every entry of a column or row vector.
Tensor scalar_weighted_sum(const Tensor& a, std::span<const double> weights);

/// Output row i is sum_j weights[i][j] * a.row(rows[i][j]). Lists may be empty
/// (zero row). Index lists are constants of the graph.
Tensor weighted_row_combination(const Tensor& a,
                                const std::vector<std::vector<std::size_t>>& rows,
                                const std::vector<std::vector<double>>& weights);
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

}  // namespace locfair::ad
