#include "locfair/autodiff/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include <fmt/format.h>

#include "locfair/error.hpp"

namespace locfair::ad {

namespace {

std::shared_ptr<Node> make_leaf(std::size_t rows, std::size_t cols, std::vector<double> values,
                                bool requires_grad) {
  if (values.size() != rows * cols) {
    throw ShapeError(fmt::format("tensor: {} values do not fill shape ({}, {})", values.size(),
                                 rows, cols));
  }
  auto node = std::make_shared<Node>();
  node->rows = rows;
  node->cols = cols;
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return node;
}

const Node& checked(const std::shared_ptr<Node>& node) {
  if (!node) throw Error("tensor: use of undefined tensor");
  return *node;
}

}  // namespace

Tensor Tensor::zeros(std::size_t rows, std::size_t cols, bool requires_grad) {
  return Tensor(make_leaf(rows, cols, std::vector<double>(rows * cols, 0.0), requires_grad));
}

Tensor Tensor::filled(std::size_t rows, std::size_t cols, double value, bool requires_grad) {
  return Tensor(make_leaf(rows, cols, std::vector<double>(rows * cols, value), requires_grad));
}

Tensor Tensor::from(std::size_t rows, std::size_t cols, std::vector<double> values,
                    bool requires_grad) {
  return Tensor(make_leaf(rows, cols, std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(make_leaf(1, 1, {value}, requires_grad));
}

std::size_t Tensor::rows() const { return checked(node_).rows; }
std::size_t Tensor::cols() const { return checked(node_).cols; }

std::string Tensor::shape_str() const {
  if (!node_) return "(undefined)";
  return fmt::format("({}, {})", node_->rows, node_->cols);
}

std::span<const double> Tensor::values() const { return checked(node_).value; }

std::span<double> Tensor::mutable_values() {
  checked(node_);
  return node_->value;
}

double Tensor::at(std::size_t r, std::size_t c) const {
  const Node& n = checked(node_);
  if (r >= n.rows || c >= n.cols) {
    throw ShapeError(fmt::format("tensor: index ({}, {}) outside shape ({}, {})", r, c, n.rows,
                                 n.cols));
  }
  return n.value[r * n.cols + c];
}

double Tensor::item() const {
  if (!is_scalar()) throw ShapeError("tensor: item() on non-scalar " + shape_str());
  return node_->value[0];
}

bool Tensor::requires_grad() const { return checked(node_).requires_grad; }

void Tensor::set_requires_grad(bool on) {
  checked(node_);
  if (!is_leaf()) throw Error("tensor: requires_grad can only be toggled on leaves");
  node_->requires_grad = on;
}

bool Tensor::is_leaf() const { return !checked(node_).backward; }

bool Tensor::has_grad() const { return !checked(node_).grad.empty(); }

std::span<const double> Tensor::grad() const { return checked(node_).grad; }

std::span<double> Tensor::mutable_grad() {
  checked(node_);
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  checked(node_);
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const {
  const Node& n = checked(node_);
  return Tensor(make_leaf(n.rows, n.cols, n.value, false));
}

void Tensor::backward() const {
  const Node& root = checked(node_);
  if (root.rows != 1 || root.cols != 1) {
    throw ShapeError("backward: loss must be a scalar, got " + shape_str());
  }
  if (!root.requires_grad) return;

  // Iterative post-order DFS gives a topological order with every node once.
  std::vector<Node*> order;
  std::unordered_set<const Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      const std::size_t k = next++;
      Node* parent = node->parents[k].get();
      if (node->parent_needs_grad[k] && !visited.contains(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->backward) n->grad.assign(n->value.size(), 0.0);
  }
  node_->ensure_grad();
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward) n->backward(*n);
  }
}

}  // namespace locfair::ad
