// SPDX-License-Identifier: Apache-2.0
#include "tabllp/diff/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace tabllp::diff {

namespace {

std::uint64_t next_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

NodePtr make_node(Matrix value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  node->id = next_id();
  return node;
}

thread_local bool g_grad_enabled = true;

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

void Node::accumulate(const Matrix& g) {
  if (g.rows() != value.rows() || g.cols() != value.cols()) {
    throw std::logic_error(std::string("gradient shape mismatch in op ") + op);
  }
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Tensor::Tensor() : node_(make_node(Matrix(0, 0), false)) {}

Tensor::Tensor(Matrix value, bool requires_grad)
    : node_(make_node(std::move(value), requires_grad)) {}

Tensor Tensor::scalar(Scalar v, bool requires_grad) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return Tensor(std::move(m), requires_grad);
}

Tensor Tensor::zeros(Eigen::Index rows, Eigen::Index cols, bool requires_grad) {
  return Tensor(Matrix::Zero(rows, cols), requires_grad);
}

void Tensor::zero_grad() { node_->grad.resize(0, 0); }

Scalar Tensor::item() const {
  if (!is_scalar()) {
    throw std::invalid_argument("item() on non-scalar tensor of shape " + shape_string());
  }
  return node_->value(0, 0);
}

std::string Tensor::shape_string() const {
  return "(" + std::to_string(rows()) + ", " + std::to_string(cols()) + ")";
}

Tensor Tensor::detach() const { return Tensor(node_->value, false); }

Tensor Tensor::make_result(Matrix value, const char* op, std::vector<Tensor> inputs,
                           std::function<void(Node&)> backward_fn) {
  const bool needs = g_grad_enabled && std::any_of(inputs.begin(), inputs.end(),
                                                   [](const Tensor& t) { return t.requires_grad(); });
  auto node = make_node(std::move(value), needs);
  node->op = op;
  if (needs) {
    node->inputs.reserve(inputs.size());
    for (auto& t : inputs) node->inputs.push_back(t.node_);
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

std::vector<Node*> tape_order(const Tensor& root) {
  std::vector<Node*> nodes;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.node().get()};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    nodes.push_back(n);
    for (auto& in : n->inputs) stack.push_back(in.get());
  }
  std::sort(nodes.begin(), nodes.end(), [](Node* a, Node* b) { return a->id > b->id; });
  return nodes;
}

void backward(const Tensor& loss) {
  if (!loss.is_scalar()) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " + loss.shape_string());
  }
  if (!std::isfinite(loss.item())) {
    throw std::runtime_error("backward: loss is not finite (" + std::to_string(loss.item()) +
                             "); training diverged");
  }
  if (!loss.requires_grad()) return;

  auto order = tape_order(loss);
  // Intermediate grads are scratch for this pass; leaves keep accumulating.
  for (Node* n : order) {
    if (!n->inputs.empty()) n->grad.resize(0, 0);
  }
  loss.node()->accumulate(Matrix::Ones(1, 1));
  for (Node* n : order) {
    if (n->backward_fn && n->grad.size() != 0) n->backward_fn(*n);
  }
  for (Node* n : order) {
    if (!n->inputs.empty()) n->grad.resize(0, 0);
  }
}

Scalar kink_margin(const Tensor& root) {
  Scalar margin = std::numeric_limits<Scalar>::infinity();
  for (Node* n : tape_order(root)) {
    if (std::string_view(n->op) == "relu" && !n->inputs.empty()) {
      const auto& x = n->inputs.front()->value;
      if (x.size() > 0) margin = std::min(margin, x.cwiseAbs().minCoeff());
    }
  }
  return margin;
}

}  // namespace tabllp::diff
