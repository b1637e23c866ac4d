#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace locfair::ad {

struct Node;

/// Handle to a dense row-major 2-D array of doubles that may take part in a
/// define-by-run computation graph. Copies share the underlying node, so a
/// parameter held by a network and by an optimizer is the same object.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor filled(std::size_t rows, std::size_t cols, double value,
                       bool requires_grad = false);
  static Tensor from(std::size_t rows, std::size_t cols, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  std::size_t rows() const;
  std::size_t cols() const;
  std::size_t size() const { return rows() * cols(); }
  bool is_scalar() const { return rows() == 1 && cols() == 1; }
  std::string shape_str() const;

  std::span<const double> values() const;
  /// Direct write access. Only meaningful for leaves (parameters, inputs);
  /// editing an interior node does not re-run the graph.
  std::span<double> mutable_values();
  double at(std::size_t r, std::size_t c) const;
  double item() const;

  bool requires_grad() const;
  /// Leaves only: toggles whether ops record a graph edge to this tensor.
  void set_requires_grad(bool on);
  bool is_leaf() const;

  bool has_grad() const;
  /// Empty span when no gradient has been accumulated yet.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Fresh leaf holding a copy of the values, disconnected from the graph.
  Tensor detach() const;

  /// Reverse-mode sweep from this scalar. Leaf gradients accumulate across
  /// calls; interior gradients are recomputed on every call.
  void backward() const;

  const std::shared_ptr<Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<Node> node_;
};

struct Node {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  /// Which parents required a gradient when this node was created. Freezing a
  /// parameter later does not change what an existing graph propagates.
  std::vector<char> parent_needs_grad;
  /// Pushes this node's grad into its parents' grads. Empty for leaves.
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

}  // namespace locfair::ad
