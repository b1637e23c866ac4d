#include "locfair/train/config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "locfair/error.hpp"

namespace locfair::train {

void TrainConfig::validate() const {
  if (epochs < 0 || finetune_epochs < 0 || probe_epochs < 0) {
    throw ConfigError("train config: epoch counts must be >= 0");
  }
  if (batch_size == 0) throw ConfigError("train config: batch size must be >= 1");
  if (d_steps < 1) throw ConfigError("train config: discriminator steps must be >= 1");
  if (k == 0) throw ConfigError("train config: K must be >= 1");
  weights.validate();
  if (!weights.any_enabled()) throw ConfigError("train config: every loss term is disabled");
}

nlohmann::json to_json(const TrainConfig& cfg) {
  const auto& w = cfg.weights;
  return {{"epochs", cfg.epochs},
          {"batch_size", cfg.batch_size},
          {"d_steps", cfg.d_steps},
          {"K", cfg.k},
          {"lambda1", w.lambda1},
          {"lambda2", w.lambda2},
          {"lambda3", w.lambda3},
          {"use_rec", w.use_rec},
          {"use_adv", w.use_adv},
          {"use_local", w.use_local},
          {"use_y", w.use_y},
          {"seed", cfg.seed},
          {"finetune_epochs", cfg.finetune_epochs},
          {"probe_epochs", cfg.probe_epochs}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  try {
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.d_steps = j.value("d_steps", cfg.d_steps);
    cfg.k = j.value("K", cfg.k);
    cfg.weights.lambda1 = j.value("lambda1", cfg.weights.lambda1);
    cfg.weights.lambda2 = j.value("lambda2", cfg.weights.lambda2);
    cfg.weights.lambda3 = j.value("lambda3", cfg.weights.lambda3);
    cfg.weights.use_rec = j.value("use_rec", cfg.weights.use_rec);
    cfg.weights.use_adv = j.value("use_adv", cfg.weights.use_adv);
    cfg.weights.use_local = j.value("use_local", cfg.weights.use_local);
    cfg.weights.use_y = j.value("use_y", cfg.weights.use_y);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.finetune_epochs = j.value("finetune_epochs", cfg.finetune_epochs);
    cfg.probe_epochs = j.value("probe_epochs", cfg.probe_epochs);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

losses::LossWeights ablation_row(int row) {
  // Columns: rec, y (lambda3), adv, local.
  struct Row {
    bool rec;
    double y;  // 0 = term off
    bool adv;
    bool local;
  };
  static constexpr Row kRows[kAblationRows] = {
      {false, 1.0, false, false}, {false, 1.0, true, false}, {false, 1.0, true, true},
      {false, 1.0, false, true},  {true, 0.0, false, false}, {true, 0.1, false, false},
      {true, 0.0, false, true},   {true, 0.1, false, true},  {true, 0.0, true, false},
      {true, 0.1, true, false},   {true, 0.0, true, true},   {true, 0.1, true, true},
      {true, 0.2, true, true},    {true, 0.5, true, true},   {true, 0.75, true, true},
      {true, 1.0, true, true}};
  if (row < 1 || row > kAblationRows) {
    throw ConfigError(fmt::format("ablation row {} outside 1..{}", row, kAblationRows));
  }
  const Row& r = kRows[row - 1];
  losses::LossWeights w;
  w.use_rec = r.rec;
  w.use_adv = r.adv;
  w.use_local = r.local;
  w.use_y = r.y > 0.0;
  w.lambda3 = r.y;
  return w;
}

void RunLog::append(const RunLog& other) {
  epochs.insert(epochs.end(), other.epochs.begin(), other.epochs.end());
  d_updates += other.d_updates;
  skipped_adv_terms += other.skipped_adv_terms;
  skipped_d_terms += other.skipped_d_terms;
  single_group_batches += other.single_group_batches;
  knn_shortfall_rows += other.knn_shortfall_rows;
}

bool RunLog::same_trajectory(const RunLog& o) const {
  if (epochs.size() != o.epochs.size() || d_updates != o.d_updates ||
      skipped_adv_terms != o.skipped_adv_terms || skipped_d_terms != o.skipped_d_terms ||
      single_group_batches != o.single_group_batches ||
      knn_shortfall_rows != o.knn_shortfall_rows) {
    return false;
  }
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& a = epochs[i];
    const auto& b = o.epochs[i];
    if (a.stage != b.stage || a.epoch != b.epoch || a.lr != b.lr || a.losses != b.losses) {
      return false;
    }
  }
  return true;
}

void write_run_log(const RunLog& log, const std::string& config_json,
                   const std::filesystem::path& path) {
  std::set<std::string> names;
  for (const auto& e : log.epochs) {
    for (const auto& [k, v] : e.losses) names.insert(k);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("run log: cannot open " + path.string());
  out << "# config: " << config_json << "\n";
  out << fmt::format("# counters: d_updates={} skipped_adv_terms={} skipped_d_terms={} "
                     "single_group_batches={} knn_shortfall_rows={}\n",
                     log.d_updates, log.skipped_adv_terms, log.skipped_d_terms,
                     log.single_group_batches, log.knn_shortfall_rows);
  out << "stage,epoch,lr";
  for (const auto& n : names) out << "," << n;
  out << ",seconds\n";
  for (const auto& e : log.epochs) {
    out << fmt::format("{},{},{:.3e}", e.stage, e.epoch, e.lr);
    for (const auto& n : names) {
      auto it = e.losses.find(n);
      out << (it == e.losses.end() ? std::string(",NA") : fmt::format(",{:.8f}", it->second));
    }
    out << fmt::format(",{:.4f}\n", e.seconds);
  }
  if (!out) throw IoError("run log: write failed for " + path.string());
}

}  // namespace locfair::train
