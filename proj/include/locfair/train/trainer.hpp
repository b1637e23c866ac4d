#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "locfair/autodiff/tensor.hpp"
#include "locfair/data/encoder.hpp"
#include "locfair/nn/bundle.hpp"
#include "locfair/rng.hpp"
#include "locfair/train/config.hpp"

namespace locfair::train {

/// Rows of a dataset as a graph input (no gradient).
ad::Tensor rows_tensor(const data::Matrix& x, std::span<const std::size_t> rows);
ad::Tensor full_tensor(const data::Matrix& x);

/// Eval-mode forward of a network over a whole matrix, no graph built.
ad::Tensor embed(const nn::Mlp& net, const ad::Tensor& x);

/// Step I: F_a and M_a jointly minimise L_a.
RunLog train_step1(const data::EncodedDataset& train, nn::ModelBundle& bundle,
                   const TrainConfig& cfg, Rng& rng);

/// Step II: per mini-batch, `d_steps` discriminator updates on resampled
/// sub-batches, then one joint F_z / G / M_y update on the enabled terms of
/// L_full. F_a stays frozen throughout.
RunLog train_step2(const data::EncodedDataset& train, nn::ModelBundle& bundle,
                   const TrainConfig& cfg, Rng& rng);

/// One discriminator update on L_d. Returns the loss value, or nullopt when
/// the batch holds no rows at all.
std::optional<double> discriminator_update(nn::ModelBundle& bundle, const ad::Tensor& x,
                                           std::span<const int> a, double lr, Rng& rng,
                                           RunLog& log);

struct GeneratorLosses {
  std::optional<double> rec, adv, local, y;
  double full = 0.0;
};

/// One joint update of F_z, G and M_y on L_full with d frozen.
GeneratorLosses generator_update(nn::ModelBundle& bundle, const ad::Tensor& x,
                                 std::span<const int> y, std::span<const int> a,
                                 double population_ratio, const TrainConfig& cfg, double lr,
                                 Rng& rng, RunLog& log);

/// Trains a sigmoid head on fixed inputs against 0/1 targets with the main
/// learning-rate schedule. `stage` labels the log records.
RunLog train_head(nn::TrainableNet& head, const ad::Tensor& inputs, std::span<const int> targets,
                  int epochs, std::size_t batch_size, Rng& rng, const char* stage);

/// Final classifier: M_y warm-started from step II with fresh Adam state,
/// trained on L_y over frozen F_z embeddings.
RunLog finetune_classifier(const data::EncodedDataset& train, nn::ModelBundle& bundle,
                           const TrainConfig& cfg, Rng& rng);

/// M_y(F_z(x)) in eval mode, thresholded to {-1, +1}.
std::vector<int> predict_labels(const nn::ModelBundle& bundle, const data::Matrix& x);

}  // namespace locfair::train
