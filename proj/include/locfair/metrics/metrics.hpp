#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace locfair::metrics {

/// Fraction of positions where pred equals truth. Throws on empty or
/// mismatched inputs.
double accuracy(std::span<const int> pred, std::span<const int> truth);

/// |P(pred = +1 | a = 0) - P(pred = +1 | a = 1)|; nullopt when a group is
/// absent.
std::optional<double> disparate_impact(std::span<const int> pred, std::span<const int> a);

/// |P(pred = +1 | a = 0, y = +1) - P(pred = +1 | a = 1, y = +1)|; nullopt when
/// either conditioning set is empty.
std::optional<double> equal_opportunity(std::span<const int> pred, std::span<const int> a,
                                        std::span<const int> y);

/// Counts over (a, y, pred) with a in {0,1}, y and pred in {-1,+1}.
class Contingency {
 public:
  static Contingency build(std::span<const int> pred, std::span<const int> a,
                           std::span<const int> y);

  std::size_t count(int a, int y, int pred) const { return counts_[slot(a, y, pred)]; }
  std::size_t total() const;

  double accuracy() const;
  std::optional<double> disparate_impact() const;
  std::optional<double> equal_opportunity() const;

 private:
  static std::size_t slot(int a, int y, int pred) {
    return static_cast<std::size_t>(a) * 4 + (y > 0 ? 2 : 0) + (pred > 0 ? 1 : 0);
  }
  std::array<std::size_t, 8> counts_{};
};

/// Sigmoid outputs to {-1, +1} with the fixed 0.5 threshold (>= 0.5 is +1).
std::vector<int> threshold_predictions(std::span<const double> probabilities);

struct FoldMetrics {
  std::size_t fold = 0;
  double accuracy_y = 0.0;
  std::optional<double> di;
  std::optional<double> eo;
  double leakage_a = 0.0;
  std::size_t n_a0 = 0;
  std::size_t n_a1 = 0;
};

/// Mean and standard error over folds of a possibly-undefined quantity. Folds
/// where the value is undefined are left out; all undefined gives nullopt.
struct Summary {
  std::optional<double> mean;
  std::optional<double> stderr_mean;
  std::size_t count = 0;

  static Summary of(std::span<const std::optional<double>> values);
};

struct FairnessReport {
  std::vector<FoldMetrics> folds;
  Summary accuracy_y;
  Summary di;
  Summary eo;
  Summary leakage_a;

  static FairnessReport aggregate(std::vector<FoldMetrics> folds);
};

}  // namespace locfair::metrics
