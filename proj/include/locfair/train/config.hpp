#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locfair/losses/losses.hpp"

namespace locfair::train {

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 64;
  /// Discriminator updates per encoder/decoder/classifier update.
  int d_steps = 20;
  std::size_t k = 4;
  losses::LossWeights weights;
  std::uint64_t seed = 0;
  /// Final classifier: warm-started M_y, fresh optimizer state.
  int finetune_epochs = 100;
  /// Leakage probe: fresh head on frozen F_z embeddings.
  int probe_epochs = 100;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Toggle/weight presets for rows 1-16 of the loss ablation grid.
losses::LossWeights ablation_row(int row);
inline constexpr int kAblationRows = 16;

struct EpochRecord {
  std::string stage;
  int epoch = 0;
  double lr = 0.0;
  /// Mean over the epoch's batches of every term that was evaluated.
  std::map<std::string, double> losses;
  double seconds = 0.0;
};

struct RunLog {
  std::vector<EpochRecord> epochs;
  std::size_t d_updates = 0;
  std::size_t skipped_adv_terms = 0;
  std::size_t skipped_d_terms = 0;
  std::size_t single_group_batches = 0;
  std::size_t knn_shortfall_rows = 0;

  void append(const RunLog& other);
  /// Counters and per-epoch values; wall-clock seconds excluded.
  bool same_trajectory(const RunLog& other) const;
};

/// Delimiter-separated log with the effective config as a leading comment.
void write_run_log(const RunLog& log, const std::string& config_json,
                   const std::filesystem::path& path);

}  // namespace locfair::train
