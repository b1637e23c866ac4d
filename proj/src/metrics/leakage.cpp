#include "locfair/metrics/leakage.hpp"

#include "locfair/error.hpp"
#include "locfair/metrics/metrics.hpp"
#include "locfair/train/trainer.hpp"

namespace locfair::metrics {

double leakage_probe(nn::ModelBundle& bundle, const data::EncodedDataset& train,
                     const data::EncodedDataset& test, const train::TrainConfig& cfg, Rng& rng,
                     train::RunLog* log) {
  bundle.fair_encoder.net.set_trainable(false);
  const auto z = train::embed(bundle.fair_encoder.net, train::full_tensor(train.x));
  nn::TrainableNet probe(nn::Mlp(nn::head_spec(), rng));
  auto probe_log =
      train::train_head(probe, z, train.a, cfg.probe_epochs, cfg.batch_size, rng, "probe");
  if (log) log->append(probe_log);
  bundle.probe = std::move(probe);
  return probe_accuracy(bundle, test);
}

double probe_accuracy(const nn::ModelBundle& bundle, const data::EncodedDataset& test) {
  if (!bundle.probe) throw Error("probe_accuracy: bundle has no trained probe");
  const auto z = train::embed(bundle.fair_encoder.net, train::full_tensor(test.x));
  const auto p = train::embed(bundle.probe->net, z);
  auto pred = threshold_predictions(p.values());
  // Probe predicts a in {0, 1}.
  for (int& v : pred) v = v > 0 ? 1 : 0;
  return accuracy(pred, test.a);
}

}  // namespace locfair::metrics
