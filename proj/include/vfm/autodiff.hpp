#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace vfm::ad {

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what)
      : std::runtime_error("shape mismatch: " + what) {}
};
struct NonScalarLoss : std::runtime_error {
  NonScalarLoss() : std::runtime_error("backward requires a 1x1 loss") {}
};

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
  std::vector<NodePtr> parents;
  std::function<void(const Node&)> backward_fn;  // accumulates into parents
  bool requires_grad = false;
};

// Handle to a node of the computation graph. Graphs are acyclic by
// construction; a graph is confined to one training thread.
class Value {
 public:
  Value() = default;
  explicit Value(NodePtr node) : node_(std::move(node)) {}

  // Leaf constructors.
  static Value leaf(Eigen::MatrixXd data, bool requires_grad = true);
  static Value constant(Eigen::MatrixXd data) { return leaf(std::move(data), false); }
  static Value scalar(double v, bool requires_grad = false);

  const Eigen::MatrixXd& data() const { return node_->value; }
  Eigen::MatrixXd& data() { return node_->value; }
  const Eigen::MatrixXd& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

// Graph ops. Forward values are exact; each op registers its backward rule.
Value matmul(const Value& a, const Value& b);
Value add(const Value& a, const Value& b);          // same shape
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);          // elementwise
Value add_bias(const Value& x, const Value& b);     // b broadcast over columns
Value relu(const Value& x);                         // subgradient 0 at 0
Value max_with_constant(const Value& x, double c);
Value concat_rows(const Value& a, const Value& b);
Value slice_rows(const Value& x, Eigen::Index start, Eigen::Index count);
Value square(const Value& x);
Value sum(const Value& x);                          // -> 1x1
Value scale(const Value& x, double k);
Value transpose(const Value& x);
Value broadcast_cols(const Value& col, Eigen::Index n);  // replicate a column

// Reverse topological gradient accumulation from a scalar loss. Gradients of
// all reachable nodes are zeroed first; leaves not on any path to the loss
// keep zero gradient.
void backward(const Value& loss);

}  // namespace vfm::ad
