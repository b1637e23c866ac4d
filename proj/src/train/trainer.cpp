#include "locfair/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "locfair/autodiff/adam.hpp"
#include "locfair/autodiff/ops.hpp"
#include "locfair/error.hpp"
#include "locfair/losses/losses.hpp"
#include "locfair/metrics/metrics.hpp"

namespace locfair::train {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

void require_finite(double value, const char* stage, const char* term, int epoch) {
  if (!std::isfinite(value)) {
    throw NumericError(fmt::format("{}: non-finite {} ({}) at epoch {}", stage, term, value,
                                   epoch));
  }
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

template <typename T>
std::vector<T> pick(std::span<const T> src, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(src[r]);
  return out;
}

/// Accumulates per-batch values into per-epoch means.
class EpochMeans {
 public:
  void add(const char* name, std::optional<double> v) {
    if (!v) return;
    auto& [sum, n] = acc_[name];
    sum += *v;
    ++n;
  }
  std::map<std::string, double> means() const {
    std::map<std::string, double> out;
    for (const auto& [k, v] : acc_) out[k] = v.first / static_cast<double>(v.second);
    return out;
  }

 private:
  std::map<std::string, std::pair<double, std::size_t>> acc_;
};

}  // namespace

ad::Tensor rows_tensor(const data::Matrix& x, std::span<const std::size_t> rows) {
  std::vector<double> v;
  v.reserve(rows.size() * x.cols);
  for (std::size_t r : rows) {
    const auto row = x.row(r);
    v.insert(v.end(), row.begin(), row.end());
  }
  return ad::Tensor::from(rows.size(), x.cols, std::move(v));
}

ad::Tensor full_tensor(const data::Matrix& x) { return ad::Tensor::from(x.rows, x.cols, x.data); }

ad::Tensor embed(const nn::Mlp& net, const ad::Tensor& x) {
  Rng unused(0);
  return net.forward(x.detach(), false, unused).detach();
}

RunLog train_step1(const data::EncodedDataset& train, nn::ModelBundle& bundle,
                   const TrainConfig& cfg, Rng& rng) {
  RunLog log;
  auto& enc = bundle.attr_encoder;
  auto& head = bundle.attr_head;
  enc.net.set_trainable(true);
  head.net.set_trainable(true);
  auto order = iota_n(train.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = Clock::now();
    const double lr = ad::lr_at_epoch(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    EpochMeans means;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::span<const std::size_t> rows(order.data() + b,
                                              std::min(cfg.batch_size, order.size() - b));
      const auto x = rows_tensor(train.x, rows);
      const auto a = pick<int>(train.a, rows);
      enc.opt.zero_grad();
      head.opt.zero_grad();
      const auto za = enc.net.forward(x, true, rng);
      const auto loss = losses::loss_a(head.net, za, a, true, rng);
      require_finite(loss.item(), "step I", "L_a", epoch);
      loss.backward();
      enc.opt.step(lr);
      head.opt.step(lr);
      means.add("loss_a", loss.item());
    }
    log.epochs.push_back({"step1", epoch, lr, means.means(), elapsed(start)});
  }
  return log;
}

std::optional<double> discriminator_update(nn::ModelBundle& bundle, const ad::Tensor& x,
                                           std::span<const int> a, double lr, Rng& rng,
                                           RunLog& log) {
  auto& d = bundle.discriminator;
  d.net.set_trainable(true);
  bundle.fair_encoder.opt.zero_grad();
  bundle.decoder.opt.zero_grad();
  bundle.label_head.opt.zero_grad();
  d.opt.zero_grad();
  // The encoder output is only an input here: no graph into F_z.
  const auto z = [&] {
    losses::FreezeGuard frozen(bundle.fair_encoder.net);
    return bundle.fair_encoder.net.forward(x, true, rng).detach();
  }();
  const auto loss = losses::loss_d(d.net, z, a, true, rng);
  log.skipped_d_terms += static_cast<std::size_t>(loss.skipped_terms);
  if (!loss.value.defined()) return std::nullopt;
  loss.value.backward();
  d.opt.step(lr);
  ++log.d_updates;
  return loss.value.item();
}

GeneratorLosses generator_update(nn::ModelBundle& bundle, const ad::Tensor& x,
                                 std::span<const int> y, std::span<const int> a,
                                 double population_ratio, const TrainConfig& cfg, double lr,
                                 Rng& rng, RunLog& log) {
  const auto& w = cfg.weights;
  auto& enc = bundle.fair_encoder;
  enc.net.set_trainable(true);
  bundle.decoder.net.set_trainable(true);
  bundle.label_head.net.set_trainable(true);
  enc.opt.zero_grad();
  bundle.decoder.opt.zero_grad();
  bundle.label_head.opt.zero_grad();
  bundle.discriminator.opt.zero_grad();

  GeneratorLosses out;
  losses::LossTerms terms;
  const auto z = enc.net.forward(x, true, rng);
  if (w.use_rec) {
    losses::FreezeGuard frozen(bundle.attr_encoder.net);
    const auto za = embed(bundle.attr_encoder.net, x);
    terms.rec = losses::loss_rec(bundle.decoder.net, za, z, x, true, rng);
    out.rec = terms.rec.item();
  }
  if (w.use_adv) {
    auto adv = losses::loss_adv(bundle.discriminator.net, z, a, true, rng);
    log.skipped_adv_terms += static_cast<std::size_t>(adv.skipped_terms);
    if (adv.skipped_terms > 0) ++log.single_group_batches;
    terms.adv = adv.value;
    if (terms.adv.defined()) out.adv = terms.adv.item();
  }
  if (w.use_local) {
    losses::LocalFairnessStats stats;
    terms.local = losses::local_fairness_loss(z, y, a, cfg.k, population_ratio, &stats);
    log.knn_shortfall_rows += stats.shortfall_rows;
    out.local = terms.local.item();
  }
  if (w.use_y) {
    terms.y = losses::loss_y(bundle.label_head.net, z, y, true, rng);
    out.y = terms.y.item();
  }
  const auto total = losses::loss_full(terms, w);
  if (!total.defined()) return out;
  out.full = total.item();
  if (!std::isfinite(out.full)) {
    throw NumericError(fmt::format(
        "step II: non-finite L_full ({}); rec={} adv={} local={} y={}", out.full,
        out.rec.value_or(0.0), out.adv.value_or(0.0), out.local.value_or(0.0),
        out.y.value_or(0.0)));
  }
  total.backward();
  enc.opt.step(lr);
  if (w.use_rec) bundle.decoder.opt.step(lr);
  if (w.use_y) bundle.label_head.opt.step(lr);
  return out;
}

RunLog train_step2(const data::EncodedDataset& train, nn::ModelBundle& bundle,
                   const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  RunLog log;
  const double r = losses::population_ratio(train.a);
  bundle.attr_encoder.net.set_trainable(false);
  bundle.attr_head.net.set_trainable(false);
  auto order = iota_n(train.size());
  auto pool = iota_n(train.size());
  const std::size_t sub = std::min(cfg.batch_size, pool.size());
  std::vector<std::size_t> sub_rows(sub);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = Clock::now();
    const double lr = ad::lr_at_epoch(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    EpochMeans means;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      if (cfg.weights.use_adv) {
        for (int s = 0; s < cfg.d_steps; ++s) {
          // Partial Fisher-Yates: a fresh uniform sub-batch from the pool.
          for (std::size_t t = 0; t < sub; ++t) {
            std::uniform_int_distribution<std::size_t> pick_pos(t, pool.size() - 1);
            std::swap(pool[t], pool[pick_pos(rng)]);
            sub_rows[t] = pool[t];
          }
          const auto xd = rows_tensor(train.x, sub_rows);
          const auto ad_rows = pick<int>(train.a, sub_rows);
          means.add("loss_d", discriminator_update(bundle, xd, ad_rows, lr, rng, log));
        }
      }
      const std::span<const std::size_t> rows(order.data() + b,
                                              std::min(cfg.batch_size, order.size() - b));
      const auto x = rows_tensor(train.x, rows);
      const auto y = pick<int>(train.y, rows);
      const auto a = pick<int>(train.a, rows);
      const auto g = generator_update(bundle, x, y, a, r, cfg, lr, rng, log);
      means.add("loss_rec", g.rec);
      means.add("loss_adv", g.adv);
      means.add("loss_local", g.local);
      means.add("loss_y", g.y);
      means.add("loss_full", g.full);
    }
    log.epochs.push_back({"step2", epoch, lr, means.means(), elapsed(start)});
  }
  return log;
}

RunLog train_head(nn::TrainableNet& head, const ad::Tensor& inputs, std::span<const int> targets,
                  int epochs, std::size_t batch_size, Rng& rng, const char* stage) {
  if (inputs.rows() != targets.size()) {
    throw ShapeError(fmt::format("{}: {} inputs, {} targets", stage, inputs.rows(),
                                 targets.size()));
  }
  RunLog log;
  head.net.set_trainable(true);
  data::Matrix features(inputs.rows(), inputs.cols());
  std::copy(inputs.values().begin(), inputs.values().end(), features.data.begin());
  auto order = iota_n(targets.size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const auto start = Clock::now();
    const double lr = ad::lr_at_epoch(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    EpochMeans means;
    for (std::size_t b = 0; b < order.size(); b += batch_size) {
      const std::span<const std::size_t> rows(order.data() + b,
                                              std::min(batch_size, order.size() - b));
      const auto x = rows_tensor(features, rows);
      const auto t = pick<int>(targets, rows);
      head.opt.zero_grad();
      const auto pred = head.net.forward(x, true, rng);
      const auto loss = ad::mean_bce(pred, losses::as_targets(t));
      require_finite(loss.item(), stage, "BCE", epoch);
      loss.backward();
      head.opt.step(lr);
      means.add("loss_head", loss.item());
    }
    log.epochs.push_back({stage, epoch, lr, means.means(), elapsed(start)});
  }
  return log;
}

RunLog finetune_classifier(const data::EncodedDataset& train, nn::ModelBundle& bundle,
                           const TrainConfig& cfg, Rng& rng) {
  bundle.fair_encoder.net.set_trainable(false);
  const auto z = embed(bundle.fair_encoder.net, full_tensor(train.x));
  bundle.label_head.opt.reset();
  return train_head(bundle.label_head, z, train.y, cfg.finetune_epochs, cfg.batch_size, rng,
                    "finetune");
}

std::vector<int> predict_labels(const nn::ModelBundle& bundle, const data::Matrix& x) {
  const auto z = embed(bundle.fair_encoder.net, full_tensor(x));
  const auto p = embed(bundle.label_head.net, z);
  return metrics::threshold_predictions(p.values());
}

}  // namespace locfair::train
