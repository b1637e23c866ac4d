#include "locfair/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <fmt/format.h>

#include "locfair/error.hpp"

namespace locfair::ad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMatrix>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

using NodePtr = std::shared_ptr<Node>;

// Builds an op result. The backward closure is only attached when at least one
// input needs a gradient, so no-grad forwards build no graph.
Tensor make_result(std::size_t rows, std::size_t cols, std::vector<double> value,
                   std::vector<NodePtr> parents, std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->rows = rows;
  node->cols = cols;
  node->value = std::move(value);
  const bool needs = std::any_of(parents.begin(), parents.end(),
                                 [](const NodePtr& p) { return p->requires_grad; });
  if (needs) {
    node->requires_grad = true;
    for (const auto& p : parents) node->parent_needs_grad.push_back(p->requires_grad ? 1 : 0);
    node->parents = std::move(parents);
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

const NodePtr& node_of(const Tensor& t, const char* op) {
  if (!t.defined()) throw Error(fmt::format("{}: undefined operand", op));
  return t.node();
}

// Accumulation target for a parent, or nullptr when it takes no gradient.
double* grad_target(Node& self, std::size_t parent) {
  if (!self.parent_needs_grad[parent]) return nullptr;
  Node& p = *self.parents[parent];
  p.ensure_grad();
  return p.grad.data();
}

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(fmt::format("{}: incompatible shapes {} and {}", op, a.shape_str(),
                               b.shape_str()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  node_of(a, "matmul");
  node_of(b, "matmul");
  if (a.cols() != b.rows()) shape_mismatch("matmul", a, b);
  const auto n = static_cast<Eigen::Index>(a.rows());
  const auto k = static_cast<Eigen::Index>(a.cols());
  const auto m = static_cast<Eigen::Index>(b.cols());
  std::vector<double> out(static_cast<std::size_t>(n * m));
  RowMap(out.data(), n, m).noalias() =
      ConstRowMap(a.values().data(), n, k) * ConstRowMap(b.values().data(), k, m);
  return make_result(a.rows(), b.cols(), std::move(out), {a.node(), b.node()},
                     [n, k, m](Node& self) {
    const Node& an = *self.parents[0];
    const Node& bn = *self.parents[1];
    const ConstRowMap g(self.grad.data(), n, m);
    if (double* ga = grad_target(self, 0)) {
      RowMap(ga, n, k).noalias() += g * ConstRowMap(bn.value.data(), k, m).transpose();
    }
    if (double* gb = grad_target(self, 1)) {
      RowMap(gb, k, m).noalias() += ConstRowMap(an.value.data(), n, k).transpose() * g;
    }
  });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  node_of(a, "add_bias");
  node_of(bias, "add_bias");
  if (bias.rows() != 1 || bias.cols() != a.cols()) shape_mismatch("add_bias", a, bias);
  const std::size_t n = a.rows(), m = a.cols();
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = bias.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += bv[j];
  }
  return make_result(n, m, std::move(out), {a.node(), bias.node()}, [n, m](Node& self) {
    const double* g = self.grad.data();
    if (double* ga = grad_target(self, 0)) {
      for (std::size_t i = 0; i < n * m; ++i) ga[i] += g[i];
    }
    if (double* gb = grad_target(self, 1)) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) gb[j] += g[i * m + j];
      }
    }
  });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  node_of(a, "leaky_relu");
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& x : out) {
    if (x < 0.0) x *= slope;
  }
  return make_result(a.rows(), a.cols(), std::move(out), {a.node()}, [slope](Node& self) {
    const Node& an = *self.parents[0];
    double* ga = grad_target(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      ga[i] += an.value[i] < 0.0 ? slope * self.grad[i] : self.grad[i];
    }
  });
}

Tensor dropout(const Tensor& a, double p, bool train_mode, Rng& rng) {
  node_of(a, "dropout");
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError(fmt::format("dropout: probability {} outside [0, 1)", p));
  }
  if (!train_mode || p == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - p);
  std::bernoulli_distribution drop(p);
  std::vector<double> mask(a.size());
  for (double& v : mask) v = drop(rng) ? 0.0 : keep_scale;
  std::vector<double> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return make_result(a.rows(), a.cols(), std::move(out), {a.node()},
                     [mask = std::move(mask)](Node& self) {
                       double* ga = grad_target(self, 0);
                       for (std::size_t i = 0; i < mask.size(); ++i) {
                         ga[i] += mask[i] * self.grad[i];
                       }
                     });
}

Tensor sigmoid(const Tensor& a) {
  node_of(a, "sigmoid");
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& x : out) {
    x = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return make_result(a.rows(), a.cols(), out, {a.node()}, [out](Node& self) {
    double* ga = grad_target(self, 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      ga[i] += self.grad[i] * out[i] * (1.0 - out[i]);
    }
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  node_of(a, "concat_cols");
  node_of(b, "concat_cols");
  if (a.rows() != b.rows()) shape_mismatch("concat_cols", a, b);
  const std::size_t n = a.rows(), ca = a.cols(), cb = b.cols(), c = ca + cb;
  std::vector<double> out(n * c);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(av.data() + i * ca, ca, out.data() + i * c);
    std::copy_n(bv.data() + i * cb, cb, out.data() + i * c + ca);
  }
  return make_result(n, c, std::move(out), {a.node(), b.node()}, [n, ca, cb, c](Node& self) {
    const double* g = self.grad.data();
    if (double* ga = grad_target(self, 0)) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < ca; ++j) ga[i * ca + j] += g[i * c + j];
      }
    }
    if (double* gb = grad_target(self, 1)) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < cb; ++j) gb[i * cb + j] += g[i * c + ca + j];
      }
    }
  });
}

Tensor mean_bce(const Tensor& pred, std::span<const double> target) {
  node_of(pred, "mean_bce");
  if (pred.cols() != 1 || pred.rows() != target.size() || target.empty()) {
    throw ShapeError(fmt::format("mean_bce: prediction {} against {} targets", pred.shape_str(),
                                 target.size()));
  }
  const auto pv = pred.values();
  const double n = static_cast<double>(target.size());
  double total = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double p = pv[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw NumericError(fmt::format("mean_bce: prediction {} at row {} outside [0, 1]", p, i));
    }
    if (target[i] != 0.0 && target[i] != 1.0) {
      throw NumericError(fmt::format("mean_bce: target {} at row {} not in {{0, 1}}", target[i], i));
    }
    const double q = std::clamp(p, kBceClamp, 1.0 - kBceClamp);
    total -= target[i] * std::log(q) + (1.0 - target[i]) * std::log(1.0 - q);
  }
  std::vector<double> t(target.begin(), target.end());
  return make_result(1, 1, {total / n}, {pred.node()}, [t = std::move(t), n](Node& self) {
    const Node& pn = *self.parents[0];
    double* gp = grad_target(self, 0);
    const double g = self.grad[0] / n;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double p = pn.value[i];
      if (p < kBceClamp || p > 1.0 - kBceClamp) continue;  // clamped: flat
      gp[i] += g * (-t[i] / p + (1.0 - t[i]) / (1.0 - p));
    }
  });
}

Tensor mean_l1(const Tensor& a, const Tensor& b) {
  node_of(a, "mean_l1");
  node_of(b, "mean_l1");
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() == 0) {
    shape_mismatch("mean_l1", a, b);
  }
  const auto av = a.values();
  const auto bv = b.values();
  const double n = static_cast<double>(a.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) total += std::abs(av[i] - bv[i]);
  return make_result(1, 1, {total / n}, {a.node(), b.node()}, [n](Node& self) {
    const Node& an = *self.parents[0];
    const Node& bn = *self.parents[1];
    const double g = self.grad[0] / n;
    double* ga = grad_target(self, 0);
    double* gb = grad_target(self, 1);
    for (std::size_t i = 0; i < an.value.size(); ++i) {
      const double d = an.value[i] - bn.value[i];
      const double s = d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
      if (ga) ga[i] += s;
      if (gb) gb[i] -= s;
    }
  });
}

Tensor l2_norm_rows(const Tensor& a) {
  node_of(a, "l2_norm_rows");
  const std::size_t n = a.rows(), m = a.cols();
  const auto av = a.values();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += av[i * m + j] * av[i * m + j];
    out[i] = std::sqrt(s);
  }
  return make_result(n, 1, out, {a.node()}, [n, m, out](Node& self) {
    const Node& an = *self.parents[0];
    double* ga = grad_target(self, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (out[i] == 0.0) continue;
      const double g = self.grad[i] / out[i];
      for (std::size_t j = 0; j < m; ++j) ga[i * m + j] += g * an.value[i * m + j];
    }
  });
}

Tensor scalar_weighted_sum(const Tensor& a, std::span<const double> weights) {
  node_of(a, "scalar_weighted_sum");
  if ((a.cols() != 1 && a.rows() != 1) || a.size() != weights.size()) {
    throw ShapeError(fmt::format("scalar_weighted_sum: vector {} against {} weights",
                                 a.shape_str(), weights.size()));
  }
  const auto av = a.values();
  double total = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) total += weights[i] * av[i];
  std::vector<double> w(weights.begin(), weights.end());
  return make_result(1, 1, {total}, {a.node()}, [w = std::move(w)](Node& self) {
    double* ga = grad_target(self, 0);
    for (std::size_t i = 0; i < w.size(); ++i) ga[i] += w[i] * self.grad[0];
  });
}

Tensor weighted_row_combination(const Tensor& a,
                                const std::vector<std::vector<std::size_t>>& rows,
                                const std::vector<std::vector<double>>& weights) {
  node_of(a, "weighted_row_combination");
  if (rows.size() != weights.size()) {
    throw ShapeError(fmt::format("weighted_row_combination: {} index lists, {} weight lists",
                                 rows.size(), weights.size()));
  }
  const std::size_t n = rows.size(), m = a.cols();
  const auto av = a.values();
  std::vector<double> out(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != weights[i].size()) {
      throw ShapeError(fmt::format("weighted_row_combination: row {} has {} indices, {} weights",
                                   i, rows[i].size(), weights[i].size()));
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      const std::size_t r = rows[i][j];
      if (r >= a.rows()) {
        throw ShapeError(fmt::format("weighted_row_combination: index {} outside {} rows", r,
                                     a.rows()));
      }
      for (std::size_t c = 0; c < m; ++c) out[i * m + c] += weights[i][j] * av[r * m + c];
    }
  }
  return make_result(n, m, std::move(out), {a.node()}, [rows, weights, m](Node& self) {
    double* ga = grad_target(self, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        const std::size_t r = rows[i][j];
        for (std::size_t c = 0; c < m; ++c) ga[r * m + c] += weights[i][j] * self.grad[i * m + c];
      }
    }
  });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows) {
  node_of(a, "gather_rows");
  const std::size_t m = a.cols();
  const auto av = a.values();
  std::vector<double> out(rows.size() * m);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= a.rows()) {
      throw ShapeError(fmt::format("gather_rows: index {} outside {} rows", rows[i], a.rows()));
    }
    std::copy_n(av.data() + rows[i] * m, m, out.data() + i * m);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return make_result(rows.size(), m, std::move(out), {a.node()},
                     [idx = std::move(idx), m](Node& self) {
                       double* ga = grad_target(self, 0);
                       for (std::size_t i = 0; i < idx.size(); ++i) {
                         for (std::size_t c = 0; c < m; ++c) {
                           ga[idx[i] * m + c] += self.grad[i * m + c];
                         }
                       }
                     });
}

Tensor sum(const Tensor& a) {
  node_of(a, "sum");
  double total = 0.0;
  for (double v : a.values()) total += v;
  return make_result(1, 1, {total}, {a.node()}, [](Node& self) {
    double* ga = grad_target(self, 0);
    const std::size_t count = self.parents[0]->value.size();
    for (std::size_t i = 0; i < count; ++i) ga[i] += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  node_of(a, "mean");
  if (a.size() == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor add(const Tensor& a, const Tensor& b) {
  node_of(a, "add");
  node_of(b, "add");
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_mismatch("add", a, b);
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return make_result(a.rows(), a.cols(), std::move(out), {a.node(), b.node()}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (double* g = grad_target(self, p)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
      }
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  node_of(a, "scale");
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v *= factor;
  return make_result(a.rows(), a.cols(), std::move(out), {a.node()}, [factor](Node& self) {
    double* ga = grad_target(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += factor * self.grad[i];
  });
}

}  // namespace locfair::ad
