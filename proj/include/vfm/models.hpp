#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfm/autodiff.hpp"
#include "vfm/dataset.hpp"

namespace vfm {

struct UnknownWell : std::runtime_error {
  explicit UnknownWell(const std::string& id)
      : std::runtime_error("unknown well: " + id) {}
};

enum class ModelType { StlGbt, StlAnn, MtlAsset, MtlUniversal };
enum class AblationVariant { Full, NoBeta, NoGamma, NoBetaNoGamma };

std::string to_string(ModelType t);
std::string to_string(AblationVariant v);
ModelType model_type_from_string(const std::string& s);
AblationVariant ablation_from_string(const std::string& s);

// Network + task-adaptation structure of one model. m_l counts linear
// layers: 1 input, (m_l-2)/2 residual blocks of 2, 1 output; m_l even, >= 4.
struct ModelSpec {
  int m_l = 4;
  int m_h = 16;
  int m_beta = 2;               // 0 disables task parameters
  bool gamma_trainable = true;  // false pins gamma = 0 (identity mapping)
  std::vector<double> breakpoints = {0.2, 0.4, 0.6, 0.8};

  int input_dim() const { return 6 + m_beta; }
  void validate() const;
};

ModelSpec build_ablation(const ModelSpec& base, AblationVariant variant);

// Scaled network inputs for one batch: column i is
// [u, p1, p2, T, phi_g, phi_o] of observation i, pressures/temperature/choke
// in scaler units, fractions raw.
Eigen::MatrixXd feature_matrix(const AssetDataset& data, const Scaler& scaler,
                               const std::vector<std::size_t>& indices);
Eigen::VectorXd scaled_targets(const AssetDataset& data, const Scaler& scaler,
                               const std::vector<std::size_t>& indices);
Eigen::VectorXd sample_weights(const AssetDataset& data,
                               const std::vector<std::size_t>& indices);

// Per-well piecewise-linear choke remapping
//   psi = (1 + g0) * (u + sum_k g_k max(0, u - u*_k)),
// the identity when all parameters are zero.
ad::Value adjust_choke(const ad::Value& u_row, const ad::Value& gamma,
                       const std::vector<double>& breakpoints);
double adjust_choke(double u, const Eigen::VectorXd& gamma,
                    const std::vector<double>& breakpoints);

// Residual feed-forward trunk: pre-activation blocks spanning two hidden
// layers, no activation on the final layer.
class ResidualNet {
 public:
  ResidualNet() = default;
  ResidualNet(int m_l, int m_h, int input_dim, std::uint64_t seed);

  // input (input_dim x n) -> prediction (1 x n)
  ad::Value forward(const ad::Value& input) const;

  std::vector<ad::Value> parameters() const;   // all W then all b
  // Everything L2-regularized under lambda: all weights and biases except b1.
  std::vector<ad::Value> regularized() const;
  const ad::Value& first_bias() const { return b_.front(); }
  int layers() const { return m_l_; }
  int hidden() const { return m_h_; }
  int input_dim() const { return input_dim_; }
  long param_count() const;

  std::vector<ad::Value>& weights() { return W_; }
  std::vector<ad::Value>& biases() { return b_; }
  const std::vector<ad::Value>& weights() const { return W_; }
  const std::vector<ad::Value>& biases() const { return b_; }

 private:
  int m_l_ = 0, m_h_ = 0, input_dim_ = 0;
  std::vector<ad::Value> W_, b_;
};

// The multi-task model f(x; gamma_j, beta_j, alpha): per-well feature
// adjustment, task parameters stacked onto the input, shared residual trunk.
// With m_beta = 0 and gamma pinned this degrades to a plain single-task
// network, which is also the STL-ANN building block.
class MtlModel {
 public:
  MtlModel() = default;
  MtlModel(ModelSpec spec, const std::vector<std::string>& well_ids,
           std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  const ResidualNet& net() const { return net_; }
  ResidualNet& net() { return net_; }
  std::vector<std::string> well_ids() const;
  bool has_well(const std::string& id) const { return gamma_.count(id) > 0; }

  // feats: 6 x n scaled features of observations all from well_id.
  ad::Value forward(const Eigen::MatrixXd& feats, const std::string& well_id) const;
  Eigen::RowVectorXd predict(const Eigen::MatrixXd& feats,
                             const std::string& well_id) const;

  std::vector<ad::Value> parameters() const;       // trainable leaves
  std::vector<ad::Value> task_parameters() const;  // per-well, lambda_T group
  std::vector<ad::Value> network_regularized() const { return net_.regularized(); }
  const ad::Value& first_bias() const { return net_.first_bias(); }

  ad::Value& gamma(const std::string& well_id);
  ad::Value& beta(const std::string& well_id);
  const ad::Value& gamma(const std::string& well_id) const;
  const ad::Value& beta(const std::string& well_id) const;

  long shared_param_count() const { return net_.param_count(); }
  long per_well_param_count() const;
  long param_count() const;

 private:
  ModelSpec spec_;
  ResidualNet net_;
  std::map<std::string, ad::Value> gamma_;  // (m_g+1) x 1, zero-initialized
  std::map<std::string, ad::Value> beta_;   // m_beta x 1, zero-initialized
};

// Closed-form parameter count for a configuration.
long network_param_count(int m_l, int m_h, int input_dim);
long mtl_param_count(const ModelSpec& spec, std::size_t n_wells);

}  // namespace vfm
