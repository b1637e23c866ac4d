#pragma once

#include "locfair/data/encoder.hpp"
#include "locfair/nn/bundle.hpp"
#include "locfair/rng.hpp"
#include "locfair/train/config.hpp"

namespace locfair::metrics {

/// Trains a fresh head (M_a architecture) on frozen F_z embeddings of the
/// training split to predict a, stores it as bundle.probe and returns its
/// accuracy on the test split.
double leakage_probe(nn::ModelBundle& bundle, const data::EncodedDataset& train,
                     const data::EncodedDataset& test, const train::TrainConfig& cfg, Rng& rng,
                     train::RunLog* log = nullptr);

/// Test accuracy of an already trained probe.
double probe_accuracy(const nn::ModelBundle& bundle, const data::EncodedDataset& test);

}  // namespace locfair::metrics
