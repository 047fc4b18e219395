#include "vfm/gbt.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace vfm::gbt {

double RegressionTree::predict(const Eigen::VectorXd& x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x(n.feature) < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].leaf_weight;
}

std::size_t RegressionTree::leaf_count() const {
  std::size_t c = 0;
  for (const auto& n : nodes) c += n.feature < 0;
  return c;
}

double GbtModel::predict(const Eigen::VectorXd& x) const {
  double acc = base_score;
  for (const auto& t : trees) acc += shrinkage * t.predict(x);
  return acc;
}

Eigen::VectorXd GbtModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out(i) = predict(Eigen::VectorXd(X.row(i)));
  }
  return out;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0;
  double gain = 0;
};

Split best_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& grad,
                 const Eigen::VectorXd& hess,
                 const std::vector<Eigen::Index>& rows, double lambda,
                 double gamma) {
  double G = 0, H = 0;
  for (Eigen::Index r : rows) {
    G += grad(r);
    H += hess(r);
  }
  const double parent_score = G * G / (H + lambda);

  Split best;
  for (int f = 0; f < X.cols(); ++f) {
    std::vector<Eigen::Index> order = rows;
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return X(a, f) < X(b, f);
    });
    double GL = 0, HL = 0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      GL += grad(order[i]);
      HL += hess(order[i]);
      const double v = X(order[i], f), next = X(order[i + 1], f);
      if (v == next) continue;  // split only between distinct values
      const double GR = G - GL, HR = H - HL;
      const double gain = 0.5 * (GL * GL / (HL + lambda) + GR * GR / (HR + lambda) -
                                 parent_score) - gamma;
      if (gain > best.gain) {
        best.feature = f;
        best.threshold = 0.5 * (v + next);
        best.gain = gain;
      }
    }
  }
  return best;
}

int grow(RegressionTree& tree, const Eigen::MatrixXd& X,
         const Eigen::VectorXd& grad, const Eigen::VectorXd& hess,
         const std::vector<Eigen::Index>& rows, int depth, int max_depth,
         double lambda, double gamma) {
  Split split;
  if (depth < max_depth && rows.size() >= 2) {
    split = best_split(X, grad, hess, rows, lambda, gamma);
  }
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (split.feature < 0 || split.gain <= 0) {
    double G = 0, H = 0;
    for (Eigen::Index r : rows) {
      G += grad(r);
      H += hess(r);
    }
    tree.nodes[static_cast<std::size_t>(index)].leaf_weight = -G / (H + lambda);
    return index;
  }
  std::vector<Eigen::Index> left, right;
  for (Eigen::Index r : rows) {
    (X(r, split.feature) < split.threshold ? left : right).push_back(r);
  }
  const int l = grow(tree, X, grad, hess, left, depth + 1, max_depth, lambda, gamma);
  const int r = grow(tree, X, grad, hess, right, depth + 1, max_depth, lambda, gamma);
  auto& node = tree.nodes[static_cast<std::size_t>(index)];
  node.feature = split.feature;
  node.threshold = split.threshold;
  node.left = l;
  node.right = r;
  return index;
}

double weighted_mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& w) {
  return (w.array() * (pred - y).array().square()).sum() / w.sum();
}

}  // namespace

RegressionTree build_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& grad,
                          const Eigen::VectorXd& hess, int max_depth,
                          double lambda, double gamma) {
  if (X.rows() == 0) throw EmptyData();
  RegressionTree tree;
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(X.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  grow(tree, X, grad, hess, rows, 0, max_depth, lambda, gamma);
  return tree;
}

GbtModel boost(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const Eigen::VectorXd& w, const GbtConfig& cfg,
               const Eigen::MatrixXd& X_val, const Eigen::VectorXd& y_val,
               const Eigen::VectorXd& w_val, BoostTrace* trace) {
  if (X.rows() == 0) throw EmptyData();
  GbtModel model;
  model.shrinkage = cfg.shrinkage;
  model.lambda = cfg.lambda;
  model.gamma = cfg.gamma;
  model.base_score = (w.array() * y.array()).sum() / w.sum();

  Eigen::VectorXd pred = Eigen::VectorXd::Constant(X.rows(), model.base_score);
  Eigen::VectorXd pred_val;
  const bool has_val = X_val.rows() > 0;
  if (has_val) pred_val = Eigen::VectorXd::Constant(X_val.rows(), model.base_score);

  double best_val = std::numeric_limits<double>::infinity();
  int best_round = 0, since_best = 0;
  for (int round = 0; round < cfg.rounds; ++round) {
    const Eigen::VectorXd grad = w.array() * (pred - y).array();
    const Eigen::VectorXd hess = w;
    RegressionTree tree =
        build_tree(X, grad, hess, cfg.max_depth, cfg.lambda, cfg.gamma);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      pred(i) += cfg.shrinkage * tree.predict(Eigen::VectorXd(X.row(i)));
    }
    model.trees.push_back(std::move(tree));
    if (trace) trace->train_loss.push_back(weighted_mse(pred, y, w));
    if (has_val) {
      for (Eigen::Index i = 0; i < X_val.rows(); ++i) {
        pred_val(i) += cfg.shrinkage * model.trees.back().predict(Eigen::VectorXd(X_val.row(i)));
      }
      const double vloss = weighted_mse(pred_val, y_val, w_val);
      if (trace) trace->validation_loss.push_back(vloss);
      if (vloss < best_val) {
        best_val = vloss;
        best_round = round + 1;
        since_best = 0;
      } else if (++since_best >= cfg.early_stopping_patience) {
        break;
      }
    }
  }
  if (has_val) {
    model.trees.resize(static_cast<std::size_t>(best_round));
    if (trace) trace->best_round = best_round;
  } else if (trace) {
    trace->best_round = static_cast<int>(model.trees.size());
  }
  return model;
}

}  // namespace vfm::gbt
