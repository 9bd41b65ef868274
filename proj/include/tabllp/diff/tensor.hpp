// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace tabllp::diff {

using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Floor applied to log inputs and norms/denominators.
inline constexpr Scalar kEpsilon = 1e-12;

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// One vertex of the computation graph. Nodes are created after their
/// inputs, so creation ids give a topological order for free.
struct Node {
  Matrix value;
  Matrix grad;  // empty until a gradient flows in
  bool requires_grad = false;
  std::uint64_t id = 0;
  const char* op = "leaf";
  std::vector<NodePtr> inputs;
  std::function<void(Node&)> backward_fn;

  void accumulate(const Matrix& g);
};

/// A 2-D tensor (rows x cols) by shared reference. Scalars are 1x1.
/// Copying a Tensor aliases the same node.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Matrix value, bool requires_grad = false);

  static Tensor scalar(Scalar v, bool requires_grad = false);
  static Tensor zeros(Eigen::Index rows, Eigen::Index cols, bool requires_grad = false);

  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad.size() != 0; }
  void zero_grad();

  bool requires_grad() const { return node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  Eigen::Index size() const { return node_->value.size(); }
  bool is_scalar() const { return rows() == 1 && cols() == 1; }
  Scalar item() const;
  std::vector<Eigen::Index> shape() const { return {rows(), cols()}; }
  std::string shape_string() const;

  const char* op() const { return node_->op; }
  const NodePtr& node() const { return node_; }

  /// Value-only copy with no history.
  Tensor detach() const;

  /// Builds an op result; the node is recorded only when some input needs grad.
  static Tensor make_result(Matrix value, const char* op, std::vector<Tensor> inputs,
                            std::function<void(Node&)> backward_fn);

 private:
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}
  NodePtr node_;
};

/// While alive, op results on this thread record no history; used for
/// inference so frozen forward passes keep no tape.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Reverse-topological list of graph nodes reachable from `root`. Each node
/// appears exactly once.
std::vector<Node*> tape_order(const Tensor& root);

/// Populates grads of every requires_grad tensor reachable from `loss`.
/// Leaf grads accumulate across calls; call zero_grad between steps.
/// Throws std::invalid_argument for non-scalar loss and
/// std::runtime_error when the loss is not finite.
void backward(const Tensor& loss);

/// Smallest |input| seen by any kinked primitive (relu) on the tape;
/// +inf when there are none. Used to keep finite-difference probes away
/// from non-differentiable points.
Scalar kink_margin(const Tensor& root);

}  // namespace tabllp::diff
