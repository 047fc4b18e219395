#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

namespace vfm::gbt {

struct EmptyData : std::runtime_error {
  EmptyData() : std::runtime_error("empty dataset") {}
};

// Binary regression tree stored as a flat node array. Inner nodes route
// "go left when value < threshold"; leaves carry the additive weight.
struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0;
  double leaf_weight = 0;
  int left = -1, right = -1;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(const Eigen::VectorXd& x) const;
  std::size_t leaf_count() const;
};

struct GbtConfig {
  int rounds = 200;
  int max_depth = 3;
  double shrinkage = 0.1;        // nu
  double lambda = 1.0;           // squared leaf weight penalty
  double gamma = 0.0;            // per-leaf penalty
  int early_stopping_patience = 50;  // rounds without validation improvement
};

struct GbtModel {
  double base_score = 0;
  double shrinkage = 0.1;
  double lambda = 1.0;
  double gamma = 0.0;
  std::vector<RegressionTree> trees;
  double predict(const Eigen::VectorXd& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;  // rows = points
};

// Exact greedy split search over midpoints between consecutive distinct
// feature values; gain and leaf weights follow the second-order objective
//   gain = 1/2 [GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)] - gamma,
//   leaf weight = -G/(H+l).
// Splits with gain <= 0 are rejected.
RegressionTree build_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& grad,
                          const Eigen::VectorXd& hess, int max_depth,
                          double lambda, double gamma);

struct BoostTrace {
  std::vector<double> train_loss;       // weighted MSE per round
  std::vector<double> validation_loss;  // empty when no validation data
  int best_round = 0;
};

// Weighted squared-error boosting: g_i = w_i (yhat - y), h_i = w_i.
// Keeps the first best_round trees when validation data triggers early
// stopping.
GbtModel boost(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const Eigen::VectorXd& w, const GbtConfig& cfg,
               const Eigen::MatrixXd& X_val = {},
               const Eigen::VectorXd& y_val = {},
               const Eigen::VectorXd& w_val = {}, BoostTrace* trace = nullptr);

}  // namespace vfm::gbt
