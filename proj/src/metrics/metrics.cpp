#include "locfair/metrics/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "locfair/error.hpp"

namespace locfair::metrics {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ShapeError(fmt::format("{}: length mismatch ({} vs {})", what, a, b));
  if (a == 0) throw ConfigError(fmt::format("{}: empty input", what));
}

std::optional<double> rate_gap(std::size_t pos0, std::size_t n0, std::size_t pos1,
                               std::size_t n1) {
  if (n0 == 0 || n1 == 0) return std::nullopt;
  return std::abs(static_cast<double>(pos0) / static_cast<double>(n0) -
                  static_cast<double>(pos1) / static_cast<double>(n1));
}

}  // namespace

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred.size(), truth.size(), "accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

std::optional<double> disparate_impact(std::span<const int> pred, std::span<const int> a) {
  check_lengths(pred.size(), a.size(), "disparate_impact");
  std::size_t n[2] = {0, 0}, pos[2] = {0, 0};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int g = a[i] != 0 ? 1 : 0;
    ++n[g];
    pos[g] += pred[i] > 0 ? 1 : 0;
  }
  return rate_gap(pos[0], n[0], pos[1], n[1]);
}

std::optional<double> equal_opportunity(std::span<const int> pred, std::span<const int> a,
                                        std::span<const int> y) {
  check_lengths(pred.size(), a.size(), "equal_opportunity");
  check_lengths(pred.size(), y.size(), "equal_opportunity");
  std::size_t n[2] = {0, 0}, pos[2] = {0, 0};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (y[i] <= 0) continue;
    const int g = a[i] != 0 ? 1 : 0;
    ++n[g];
    pos[g] += pred[i] > 0 ? 1 : 0;
  }
  return rate_gap(pos[0], n[0], pos[1], n[1]);
}

Contingency Contingency::build(std::span<const int> pred, std::span<const int> a,
                               std::span<const int> y) {
  check_lengths(pred.size(), a.size(), "contingency");
  check_lengths(pred.size(), y.size(), "contingency");
  Contingency c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++c.counts_[slot(a[i] != 0 ? 1 : 0, y[i], pred[i])];
  }
  return c;
}

std::size_t Contingency::total() const {
  std::size_t t = 0;
  for (std::size_t v : counts_) t += v;
  return t;
}

double Contingency::accuracy() const {
  std::size_t hits = 0;
  for (int g = 0; g < 2; ++g) hits += count(g, 1, 1) + count(g, -1, -1);
  return static_cast<double>(hits) / static_cast<double>(total());
}

std::optional<double> Contingency::disparate_impact() const {
  std::size_t n[2], pos[2];
  for (int g = 0; g < 2; ++g) {
    pos[g] = count(g, 1, 1) + count(g, -1, 1);
    n[g] = pos[g] + count(g, 1, -1) + count(g, -1, -1);
  }
  return rate_gap(pos[0], n[0], pos[1], n[1]);
}

std::optional<double> Contingency::equal_opportunity() const {
  std::size_t n[2], pos[2];
  for (int g = 0; g < 2; ++g) {
    pos[g] = count(g, 1, 1);
    n[g] = pos[g] + count(g, 1, -1);
  }
  return rate_gap(pos[0], n[0], pos[1], n[1]);
}

std::vector<int> threshold_predictions(std::span<const double> probabilities) {
  std::vector<int> out;
  out.reserve(probabilities.size());
  for (double p : probabilities) out.push_back(p >= 0.5 ? 1 : -1);
  return out;
}

Summary Summary::of(std::span<const std::optional<double>> values) {
  Summary s;
  double total = 0.0;
  for (const auto& v : values) {
    if (!v) continue;
    total += *v;
    ++s.count;
  }
  if (s.count == 0) return s;
  const double mean = total / static_cast<double>(s.count);
  double ss = 0.0;
  for (const auto& v : values) {
    if (v) ss += (*v - mean) * (*v - mean);
  }
  s.mean = mean;
  s.stderr_mean = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) /
                                    std::sqrt(static_cast<double>(s.count))
                              : 0.0;
  return s;
}

FairnessReport FairnessReport::aggregate(std::vector<FoldMetrics> folds) {
  FairnessReport r;
  std::vector<std::optional<double>> acc, di, eo, leak;
  for (const auto& f : folds) {
    acc.emplace_back(f.accuracy_y);
    di.push_back(f.di);
    eo.push_back(f.eo);
    leak.emplace_back(f.leakage_a);
  }
  r.accuracy_y = Summary::of(acc);
  r.di = Summary::of(di);
  r.eo = Summary::of(eo);
  r.leakage_a = Summary::of(leak);
  r.folds = std::move(folds);
  return r;
}

}  // namespace locfair::metrics
