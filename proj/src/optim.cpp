#include "vfm/optim.hpp"

#include <cmath>

namespace vfm {

AdamW::AdamW(std::vector<ad::Value> params, double lr, double beta1,
             double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    v_.emplace_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
  }
}

void AdamW::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Eigen::MatrixXd& g = params_[i].grad();
    if (!g.allFinite()) throw NonFiniteGradient();
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    const Eigen::ArrayXXd m_hat = m_[i].array() / bc1;
    const Eigen::ArrayXXd v_hat = v_[i].array() / bc2;
    params_[i].data().array() -= lr_ * m_hat / (v_hat.sqrt() + eps_);
  }
}

double lr_schedule(long epoch, long total_epochs, double base) {
  if (total_epochs < 500) throw TotalTooSmall();
  if (epoch < 0 || epoch >= total_epochs) {
    throw std::out_of_range("epoch outside [0, total_epochs)");
  }
  const long window_start = total_epochs - 500;
  if (epoch < window_start) return base;
  const long halvings = 1 + (epoch - window_start) / 100;
  return base * std::pow(0.5, static_cast<double>(halvings));
}

}  // namespace vfm
