#include "vfm/autodiff.hpp"

#include <unordered_set>

namespace vfm::ad {

namespace {

std::string shape_str(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

NodePtr make_node(Eigen::MatrixXd value, std::vector<NodePtr> parents,
                  std::function<void(const Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->grad = Eigen::MatrixXd::Zero(n->value.rows(), n->value.cols());
  bool any = false;
  for (const auto& p : parents) any = any || p->requires_grad;
  n->requires_grad = any;
  if (any) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

}  // namespace

Value Value::leaf(Eigen::MatrixXd data, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(data);
  n->grad = Eigen::MatrixXd::Zero(n->value.rows(), n->value.cols());
  n->requires_grad = requires_grad;
  return Value(n);
}

Value Value::scalar(double v, bool requires_grad) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = v;
  return leaf(std::move(m), requires_grad);
}

Value matmul(const Value& a, const Value& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("matmul " + shape_str(a.data()) + " * " + shape_str(b.data()));
  }
  auto pa = a.node(), pb = b.node();
  return Value(make_node(pa->value * pb->value, {pa, pb},
                         [pa, pb](const Node& out) {
                           if (pa->requires_grad) pa->grad += out.grad * pb->value.transpose();
                           if (pb->requires_grad) pb->grad += pa->value.transpose() * out.grad;
                         }));
}

Value add(const Value& a, const Value& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch("add " + shape_str(a.data()) + " + " + shape_str(b.data()));
  }
  auto pa = a.node(), pb = b.node();
  return Value(make_node(pa->value + pb->value, {pa, pb},
                         [pa, pb](const Node& out) {
                           if (pa->requires_grad) pa->grad += out.grad;
                           if (pb->requires_grad) pb->grad += out.grad;
                         }));
}

Value sub(const Value& a, const Value& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch("sub " + shape_str(a.data()) + " - " + shape_str(b.data()));
  }
  auto pa = a.node(), pb = b.node();
  return Value(make_node(pa->value - pb->value, {pa, pb},
                         [pa, pb](const Node& out) {
                           if (pa->requires_grad) pa->grad += out.grad;
                           if (pb->requires_grad) pb->grad -= out.grad;
                         }));
}

Value mul(const Value& a, const Value& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch("mul " + shape_str(a.data()) + " * " + shape_str(b.data()));
  }
  auto pa = a.node(), pb = b.node();
  return Value(make_node(pa->value.cwiseProduct(pb->value), {pa, pb},
                         [pa, pb](const Node& out) {
                           if (pa->requires_grad) pa->grad += out.grad.cwiseProduct(pb->value);
                           if (pb->requires_grad) pb->grad += out.grad.cwiseProduct(pa->value);
                         }));
}

Value add_bias(const Value& x, const Value& b) {
  if (b.cols() != 1 || x.rows() != b.rows()) {
    throw ShapeMismatch("add_bias " + shape_str(x.data()) + " + " + shape_str(b.data()));
  }
  auto px = x.node(), pb = b.node();
  return Value(make_node(px->value.colwise() + Eigen::VectorXd(pb->value.col(0)),
                         {px, pb}, [px, pb](const Node& out) {
                           if (px->requires_grad) px->grad += out.grad;
                           if (pb->requires_grad) pb->grad += out.grad.rowwise().sum();
                         }));
}

Value relu(const Value& x) { return max_with_constant(x, 0.0); }

Value max_with_constant(const Value& x, double c) {
  auto px = x.node();
  return Value(make_node(px->value.cwiseMax(c), {px},
                         [px, c](const Node& out) {
                           if (!px->requires_grad) return;
                           px->grad += (px->value.array() > c)
                                           .select(out.grad.array(), 0.0)
                                           .matrix();
                         }));
}

Value concat_rows(const Value& a, const Value& b) {
  if (a.cols() != b.cols()) {
    throw ShapeMismatch("concat_rows " + shape_str(a.data()) + " | " + shape_str(b.data()));
  }
  auto pa = a.node(), pb = b.node();
  Eigen::MatrixXd v(a.rows() + b.rows(), a.cols());
  v << pa->value, pb->value;
  const Eigen::Index ra = a.rows();
  return Value(make_node(std::move(v), {pa, pb},
                         [pa, pb, ra](const Node& out) {
                           if (pa->requires_grad) pa->grad += out.grad.topRows(ra);
                           if (pb->requires_grad) pb->grad += out.grad.bottomRows(out.grad.rows() - ra);
                         }));
}

Value slice_rows(const Value& x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.rows()) {
    throw ShapeMismatch("slice_rows out of range");
  }
  auto px = x.node();
  return Value(make_node(px->value.middleRows(start, count), {px},
                         [px, start, count](const Node& out) {
                           if (px->requires_grad) px->grad.middleRows(start, count) += out.grad;
                         }));
}

Value square(const Value& x) {
  auto px = x.node();
  return Value(make_node(px->value.cwiseProduct(px->value), {px},
                         [px](const Node& out) {
                           if (px->requires_grad) {
                             px->grad += 2.0 * out.grad.cwiseProduct(px->value);
                           }
                         }));
}

Value sum(const Value& x) {
  auto px = x.node();
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = px->value.sum();
  return Value(make_node(std::move(v), {px}, [px](const Node& out) {
    if (px->requires_grad) px->grad.array() += out.grad(0, 0);
  }));
}

Value scale(const Value& x, double k) {
  auto px = x.node();
  return Value(make_node(px->value * k, {px}, [px, k](const Node& out) {
    if (px->requires_grad) px->grad += k * out.grad;
  }));
}

Value transpose(const Value& x) {
  auto px = x.node();
  return Value(make_node(px->value.transpose(), {px}, [px](const Node& out) {
    if (px->requires_grad) px->grad += out.grad.transpose();
  }));
}

Value broadcast_cols(const Value& col, Eigen::Index n) {
  if (col.cols() != 1) throw ShapeMismatch("broadcast_cols needs a column");
  auto pc = col.node();
  return Value(make_node(pc->value.col(0).replicate(1, n), {pc},
                         [pc](const Node& out) {
                           if (pc->requires_grad) pc->grad += out.grad.rowwise().sum();
                         }));
}

void backward(const Value& loss) {
  if (!loss.node()) throw NonScalarLoss();
  if (loss.rows() != 1 || loss.cols() != 1) throw NonScalarLoss();

  // Reverse topological order by iterative DFS.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack{{loss.node().get(), 0}};
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node* p = f.node->parents[f.next_parent++].get();
      if (p->requires_grad && visited.insert(p).second) {
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  // Gradients are zeroed at the start of every backward pass.
  for (Node* n : order) n->grad.setZero();
  loss.node()->grad(0, 0) = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

}  // namespace vfm::ad
