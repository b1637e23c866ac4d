#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "locfair/autodiff/tensor.hpp"
#include "locfair/nn/mlp.hpp"
#include "locfair/rng.hpp"

namespace locfair::losses {

/// Weights and on/off switches of the step-II objective
///   L_full = L_rec + lambda1 L_adv + lambda2 L_local + lambda3 L_y.
struct LossWeights {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = 0.1;
  bool use_rec = true;
  bool use_adv = true;
  bool use_local = true;
  bool use_y = true;

  void validate() const;
  bool any_enabled() const { return use_rec || use_adv || use_local || use_y; }
};

/// count(a = 0) / count(a = 1). Throws ConfigError when a group is empty.
double population_ratio(std::span<const int> a);

/// {-1, +1} labels or {0, 1} attributes as 0/1 BCE targets.
std::vector<double> as_targets(std::span<const int> values);

/// Mean BCE of M_a(F_a(x)) against a. Takes the F_a embedding.
ad::Tensor loss_a(const nn::Mlp& attr_head, const ad::Tensor& attr_embedding,
                  std::span<const int> a, bool train_mode, Rng& rng);

/// Mean BCE of M_y(F_z(x)) against y mapped to {0, 1}.
ad::Tensor loss_y(const nn::Mlp& label_head, const ad::Tensor& embedding, std::span<const int> y,
                  bool train_mode, Rng& rng);

/// Result of a loss made of one mean-BCE term per sensitive group. A group
/// missing from the batch drops its term; `value` is undefined when both are.
struct GroupLoss {
  ad::Tensor value;
  int skipped_terms = 0;
};

/// Adversarial loss for the encoder: both groups pushed towards d = 1.
/// Parameters of d are frozen for the graph built here; gradients reach the
/// embedding only.
GroupLoss loss_adv(nn::Mlp& discriminator, const ad::Tensor& embedding, std::span<const int> a,
                   bool train_mode, Rng& rng);

/// Discriminator loss: group 0 -> 0, group 1 -> 1. The embedding is detached,
/// so gradients reach d only.
GroupLoss loss_d(const nn::Mlp& discriminator, const ad::Tensor& embedding,
                 std::span<const int> a, bool train_mode, Rng& rng);

/// Mean over rows of || G([z_a, z]) - x ||_1. z_a is detached (F_a frozen).
ad::Tensor loss_rec(const nn::Mlp& decoder, const ad::Tensor& attr_embedding,
                    const ad::Tensor& embedding, const ad::Tensor& x, bool train_mode, Rng& rng);

struct LocalFairnessStats {
  std::size_t shortfall_rows = 0;
};

/// Neighbor weights: -1 for a = 0, r for a = 1.
inline double neighbor_weight(int a, double r) { return a == 0 ? -1.0 : r; }

/// Sum over label classes of the class-mean of
///   || sum_j w(a_j) z_j ||_2
/// where j runs over each row's K nearest same-label rows. Neighbor indices
/// are chosen on the current values and held fixed for the backward pass.
ad::Tensor local_fairness_loss(const ad::Tensor& embedding, std::span<const int> y,
                               std::span<const int> a, std::size_t k, double r,
                               LocalFairnessStats* stats = nullptr);

/// Same loss with externally supplied neighbor lists.
ad::Tensor local_fairness_loss_fixed(const ad::Tensor& embedding, std::span<const int> y,
                                     std::span<const int> a,
                                     const std::vector<std::vector<std::size_t>>& neighbors,
                                     double r);

/// Individually computed terms; undefined tensors are disabled terms.
struct LossTerms {
  ad::Tensor rec;
  ad::Tensor adv;
  ad::Tensor local;
  ad::Tensor y;
};

/// Weighted sum over the terms that are both enabled and defined. Returns an
/// undefined tensor when nothing contributes.
ad::Tensor loss_full(const LossTerms& terms, const LossWeights& weights);

/// Freezes a network's parameters for the guard's lifetime.
class FreezeGuard {
 public:
  explicit FreezeGuard(nn::Mlp& net);
  ~FreezeGuard();
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  nn::Mlp& net_;
  std::vector<bool> previous_;
};

}  // namespace locfair::losses
