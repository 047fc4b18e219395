#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

#include "vfm/autodiff.hpp"

namespace vfm {

struct NonFiniteGradient : std::runtime_error {
  NonFiniteGradient() : std::runtime_error("non-finite gradient") {}
};
struct TotalTooSmall : std::runtime_error {
  TotalTooSmall() : std::runtime_error("schedule requires total_epochs >= 500") {}
};

// Adam with bias correction. The decoupled weight-decay coefficient is fixed
// to 0; explicit L2 lives in the loss so that the parameter-group exclusions
// (first bias, task parameters) stay visible.
class AdamW {
 public:
  explicit AdamW(std::vector<ad::Value> params, double lr = 1e-3,
                 double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  long step_count() const { return step_; }
  const std::vector<ad::Value>& params() const { return params_; }

  // One update from the gradients currently stored on the parameters.
  void step();

 private:
  std::vector<ad::Value> params_;
  std::vector<Eigen::MatrixXd> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
};

// Base rate for the first total-500 epochs, then a halving at the start of
// each of the last five 100-epoch windows.
double lr_schedule(long epoch, long total_epochs, double base = 1e-3);

}  // namespace vfm
