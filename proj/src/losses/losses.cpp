#include "locfair/losses/losses.hpp"

#include <fmt/format.h>

#include "locfair/autodiff/ops.hpp"
#include "locfair/error.hpp"
#include "locfair/losses/knn.hpp"

namespace locfair::losses {

void LossWeights::validate() const {
  for (double w : {lambda1, lambda2, lambda3}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError(fmt::format("loss weights must be finite and >= 0 (got {})", w));
    }
  }
}

double population_ratio(std::span<const int> a) {
  std::size_t zeros = 0, ones = 0;
  for (int v : a) (v == 0 ? zeros : ones) += 1;
  if (zeros == 0 || ones == 0) {
    throw ConfigError(fmt::format("population ratio undefined: {} rows with a=0, {} with a=1",
                                  zeros, ones));
  }
  return static_cast<double>(zeros) / static_cast<double>(ones);
}

std::vector<double> as_targets(std::span<const int> values) {
  std::vector<double> t;
  t.reserve(values.size());
  for (int v : values) t.push_back(v > 0 ? 1.0 : 0.0);
  return t;
}

ad::Tensor loss_a(const nn::Mlp& attr_head, const ad::Tensor& attr_embedding,
                  std::span<const int> a, bool train_mode, Rng& rng) {
  const auto pred = attr_head.forward(attr_embedding, train_mode, rng);
  return ad::mean_bce(pred, as_targets(a));
}

ad::Tensor loss_y(const nn::Mlp& label_head, const ad::Tensor& embedding, std::span<const int> y,
                  bool train_mode, Rng& rng) {
  const auto pred = label_head.forward(embedding, train_mode, rng);
  return ad::mean_bce(pred, as_targets(y));
}

namespace {

std::vector<std::size_t> rows_with(std::span<const int> a, int value) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == value) idx.push_back(i);
  }
  return idx;
}

// Sum over groups g of mean BCE(d(z_g), target(g)).
GroupLoss group_bce(const nn::Mlp& d, const ad::Tensor& z, std::span<const int> a,
                    double target0, double target1, bool train_mode, Rng& rng) {
  if (z.rows() != a.size()) {
    throw ShapeError(fmt::format("group loss: {} embeddings, {} attributes", z.rows(), a.size()));
  }
  GroupLoss out;
  for (int g = 0; g < 2; ++g) {
    const auto idx = rows_with(a, g);
    if (idx.empty()) {
      ++out.skipped_terms;
      continue;
    }
    const auto pred = d.forward(ad::gather_rows(z, idx), train_mode, rng);
    const std::vector<double> target(idx.size(), g == 0 ? target0 : target1);
    auto term = ad::mean_bce(pred, target);
    out.value = out.value.defined() ? ad::add(out.value, term) : term;
  }
  return out;
}

}  // namespace

GroupLoss loss_adv(nn::Mlp& discriminator, const ad::Tensor& embedding, std::span<const int> a,
                   bool train_mode, Rng& rng) {
  FreezeGuard frozen(discriminator);
  return group_bce(discriminator, embedding, a, 1.0, 1.0, train_mode, rng);
}

GroupLoss loss_d(const nn::Mlp& discriminator, const ad::Tensor& embedding,
                 std::span<const int> a, bool train_mode, Rng& rng) {
  return group_bce(discriminator, embedding.detach(), a, 0.0, 1.0, train_mode, rng);
}

ad::Tensor loss_rec(const nn::Mlp& decoder, const ad::Tensor& attr_embedding,
                    const ad::Tensor& embedding, const ad::Tensor& x, bool train_mode, Rng& rng) {
  const auto joint = ad::concat_cols(attr_embedding.detach(), embedding);
  const auto recon = decoder.forward(joint, train_mode, rng);
  return ad::mean_l1(recon, x);
}

ad::Tensor local_fairness_loss_fixed(const ad::Tensor& embedding, std::span<const int> y,
                                     std::span<const int> a,
                                     const std::vector<std::vector<std::size_t>>& neighbors,
                                     double r) {
  const std::size_t n = embedding.rows();
  if (y.size() != n || a.size() != n || neighbors.size() != n) {
    throw ShapeError(fmt::format("local fairness: {} embeddings, {} labels, {} attributes, {} "
                                 "neighbor lists",
                                 n, y.size(), a.size(), neighbors.size()));
  }
  std::size_t positives = 0;
  for (int v : y) positives += v > 0 ? 1 : 0;
  const std::size_t negatives = n - positives;

  std::vector<std::vector<double>> weights(n);
  std::vector<double> class_mean(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbors[i]) weights[i].push_back(neighbor_weight(a[j], r));
    class_mean[i] = 1.0 / static_cast<double>(y[i] > 0 ? positives : negatives);
  }
  const auto combined = ad::weighted_row_combination(embedding, neighbors, weights);
  return ad::scalar_weighted_sum(ad::l2_norm_rows(combined), class_mean);
}

ad::Tensor local_fairness_loss(const ad::Tensor& embedding, std::span<const int> y,
                               std::span<const int> a, std::size_t k, double r,
                               LocalFairnessStats* stats) {
  if (y.size() != embedding.rows()) {
    throw ShapeError(fmt::format("local fairness: {} embeddings, {} labels", embedding.rows(),
                                 y.size()));
  }
  auto knn = knn_same_label(embedding.values(), embedding.cols(), y, k);
  if (stats) stats->shortfall_rows += knn.shortfall_rows;
  return local_fairness_loss_fixed(embedding, y, a, knn.neighbors, r);
}

ad::Tensor loss_full(const LossTerms& terms, const LossWeights& weights) {
  ad::Tensor total;
  auto accumulate = [&](bool enabled, const ad::Tensor& term, double w) {
    if (!enabled || !term.defined()) return;
    auto scaled = w == 1.0 ? term : ad::scale(term, w);
    total = total.defined() ? ad::add(total, scaled) : scaled;
  };
  accumulate(weights.use_rec, terms.rec, 1.0);
  accumulate(weights.use_adv, terms.adv, weights.lambda1);
  accumulate(weights.use_local, terms.local, weights.lambda2);
  accumulate(weights.use_y, terms.y, weights.lambda3);
  return total;
}

FreezeGuard::FreezeGuard(nn::Mlp& net) : net_(net) {
  for (auto& p : net_.params()) {
    previous_.push_back(p.requires_grad());
    p.set_requires_grad(false);
  }
}

FreezeGuard::~FreezeGuard() {
  auto params = net_.params();
  for (std::size_t i = 0; i < params.size(); ++i) params[i].set_requires_grad(previous_[i]);
}

}  // namespace locfair::losses
