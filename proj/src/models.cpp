#include "vfm/models.hpp"

#include <cmath>

#include "vfm/rng.hpp"

namespace vfm {

std::string to_string(ModelType t) {
  switch (t) {
    case ModelType::StlGbt: return "stl-gbt";
    case ModelType::StlAnn: return "stl-ann";
    case ModelType::MtlAsset: return "mtl-asset";
    case ModelType::MtlUniversal: return "mtl-universal";
  }
  return "?";
}

std::string to_string(AblationVariant v) {
  switch (v) {
    case AblationVariant::Full: return "full";
    case AblationVariant::NoBeta: return "no-beta";
    case AblationVariant::NoGamma: return "no-gamma";
    case AblationVariant::NoBetaNoGamma: return "no-beta-no-gamma";
  }
  return "?";
}

ModelType model_type_from_string(const std::string& s) {
  if (s == "stl-gbt") return ModelType::StlGbt;
  if (s == "stl-ann") return ModelType::StlAnn;
  if (s == "mtl-asset") return ModelType::MtlAsset;
  if (s == "mtl-universal") return ModelType::MtlUniversal;
  throw std::invalid_argument("unknown model type: " + s);
}

AblationVariant ablation_from_string(const std::string& s) {
  if (s == "full") return AblationVariant::Full;
  if (s == "no-beta") return AblationVariant::NoBeta;
  if (s == "no-gamma") return AblationVariant::NoGamma;
  if (s == "no-beta-no-gamma") return AblationVariant::NoBetaNoGamma;
  throw std::invalid_argument("unknown ablation variant: " + s);
}

void ModelSpec::validate() const {
  if (m_l < 4 || m_l % 2 != 0) {
    throw std::invalid_argument("m_l must be even and >= 4");
  }
  if (m_h < 1) throw std::invalid_argument("m_h must be positive");
  if (m_beta < 0) throw std::invalid_argument("m_beta must be non-negative");
  double prev = 0.0;
  for (double b : breakpoints) {
    if (!(b > prev && b < 1.0)) {
      throw std::invalid_argument("breakpoints must be strictly increasing in (0,1)");
    }
    prev = b;
  }
}

ModelSpec build_ablation(const ModelSpec& base, AblationVariant variant) {
  ModelSpec spec = base;
  if (variant == AblationVariant::NoBeta ||
      variant == AblationVariant::NoBetaNoGamma) {
    spec.m_beta = 0;
  }
  if (variant == AblationVariant::NoGamma ||
      variant == AblationVariant::NoBetaNoGamma) {
    spec.gamma_trainable = false;
  }
  return spec;
}

Eigen::MatrixXd feature_matrix(const AssetDataset& data, const Scaler& scaler,
                               const std::vector<std::size_t>& indices) {
  Eigen::MatrixXd X(6, static_cast<Eigen::Index>(indices.size()));
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const auto& o = data.obs(indices[static_cast<std::size_t>(c)]);
    X(0, c) = scaler.u.apply(o.u);
    X(1, c) = scaler.p1.apply(o.p1);
    X(2, c) = scaler.p2.apply(o.p2);
    X(3, c) = scaler.T.apply(o.T);
    X(4, c) = o.phi_g;
    X(5, c) = o.phi_o;
  }
  return X;
}

Eigen::VectorXd scaled_targets(const AssetDataset& data, const Scaler& scaler,
                               const std::vector<std::size_t>& indices) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(indices.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y(i) = scaler.Q.apply(data.obs(indices[static_cast<std::size_t>(i)]).total_rate());
  }
  return y;
}

Eigen::VectorXd sample_weights(const AssetDataset& data,
                               const std::vector<std::size_t>& indices) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(indices.size()));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w(i) = data.obs(indices[static_cast<std::size_t>(i)]).weight;
  }
  return w;
}

ad::Value adjust_choke(const ad::Value& u_row, const ad::Value& gamma,
                       const std::vector<double>& breakpoints) {
  const auto m_g = static_cast<Eigen::Index>(breakpoints.size());
  const Eigen::Index n = u_row.cols();
  // Hinge features max(0, u - u*_k) depend only on data, not on gamma.
  Eigen::MatrixXd hinges(m_g, n);
  for (Eigen::Index k = 0; k < m_g; ++k) {
    hinges.row(k) =
        (u_row.data().row(0).array() - breakpoints[static_cast<std::size_t>(k)])
            .max(0.0);
  }
  ad::Value g0 = ad::slice_rows(gamma, 0, 1);
  ad::Value g_rest = ad::slice_rows(gamma, 1, m_g);
  ad::Value lin = ad::add(u_row, ad::matmul(ad::transpose(g_rest),
                                            ad::Value::constant(hinges)));
  ad::Value gain = ad::broadcast_cols(ad::add(g0, ad::Value::scalar(1.0)), n);
  return ad::mul(gain, lin);
}

double adjust_choke(double u, const Eigen::VectorXd& gamma,
                    const std::vector<double>& breakpoints) {
  double acc = u;
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    acc += gamma(static_cast<Eigen::Index>(k) + 1) *
           std::max(0.0, u - breakpoints[k]);
  }
  return (1.0 + gamma(0)) * acc;
}

ResidualNet::ResidualNet(int m_l, int m_h, int input_dim, std::uint64_t seed)
    : m_l_(m_l), m_h_(m_h), input_dim_(input_dim) {
  if (m_l < 4 || m_l % 2 != 0) {
    throw std::invalid_argument("m_l must be even and >= 4");
  }
  auto rng = make_rng(seed);
  auto init = [&rng](Eigen::Index rows, Eigen::Index cols) {
    const double bound = std::sqrt(6.0 / static_cast<double>(cols));
    std::uniform_real_distribution<double> unif(-bound, bound);
    Eigen::MatrixXd W(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) W(i, j) = unif(rng);
    }
    return W;
  };
  // Layer k=1 maps the stacked input; k=2..m_l-1 live inside residual
  // blocks; k=m_l is the linear output layer.
  W_.push_back(ad::Value::leaf(init(m_h, input_dim)));
  b_.push_back(ad::Value::leaf(Eigen::MatrixXd::Zero(m_h, 1)));
  for (int k = 2; k < m_l; ++k) {
    W_.push_back(ad::Value::leaf(init(m_h, m_h)));
    b_.push_back(ad::Value::leaf(Eigen::MatrixXd::Zero(m_h, 1)));
  }
  W_.push_back(ad::Value::leaf(init(1, m_h)));
  b_.push_back(ad::Value::leaf(Eigen::MatrixXd::Zero(1, 1)));
}

ad::Value ResidualNet::forward(const ad::Value& input) const {
  if (input.rows() != input_dim_) {
    throw ad::ShapeMismatch("network input has " + std::to_string(input.rows()) +
                            " rows, expected " + std::to_string(input_dim_));
  }
  ad::Value z = ad::add_bias(ad::matmul(W_[0], input), b_[0]);
  for (int k = 2; k <= m_l_ - 2; k += 2) {
    // z^{k+2} = z^k + W_{k+1} relu(W_k relu(z^k) + b_k) + b_{k+1}
    const auto i = static_cast<std::size_t>(k) - 1;
    ad::Value inner = ad::add_bias(ad::matmul(W_[i], ad::relu(z)), b_[i]);
    ad::Value update = ad::add_bias(ad::matmul(W_[i + 1], ad::relu(inner)), b_[i + 1]);
    z = ad::add(z, update);
  }
  return ad::add_bias(ad::matmul(W_.back(), z), b_.back());
}

std::vector<ad::Value> ResidualNet::parameters() const {
  std::vector<ad::Value> out = W_;
  out.insert(out.end(), b_.begin(), b_.end());
  return out;
}

std::vector<ad::Value> ResidualNet::regularized() const {
  std::vector<ad::Value> out = W_;
  out.insert(out.end(), b_.begin() + 1, b_.end());
  return out;
}

long ResidualNet::param_count() const {
  return network_param_count(m_l_, m_h_, input_dim_);
}

long network_param_count(int m_l, int m_h, int input_dim) {
  long count = static_cast<long>(m_h) * input_dim + m_h;   // input layer
  count += static_cast<long>(m_l - 2) * (static_cast<long>(m_h) * m_h + m_h);
  count += m_h + 1;                                        // output layer
  return count;
}

long mtl_param_count(const ModelSpec& spec, std::size_t n_wells) {
  long per_well = spec.m_beta;
  if (spec.gamma_trainable) {
    per_well += static_cast<long>(spec.breakpoints.size()) + 1;
  }
  return network_param_count(spec.m_l, spec.m_h, spec.input_dim()) +
         per_well * static_cast<long>(n_wells);
}

MtlModel::MtlModel(ModelSpec spec, const std::vector<std::string>& well_ids,
                   std::uint64_t seed)
    : spec_(std::move(spec)),
      net_(spec_.m_l, spec_.m_h, spec_.input_dim(), derive_seed(seed, 0)) {
  spec_.validate();
  const auto m_g = static_cast<Eigen::Index>(spec_.breakpoints.size());
  for (const auto& id : well_ids) {
    // Zero init: every well starts as the average model with an identity
    // choke mapping.
    gamma_[id] = ad::Value::leaf(Eigen::MatrixXd::Zero(m_g + 1, 1),
                                 spec_.gamma_trainable);
    beta_[id] = ad::Value::leaf(Eigen::MatrixXd::Zero(spec_.m_beta, 1));
  }
}

std::vector<std::string> MtlModel::well_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : gamma_) out.push_back(id);
  return out;
}

ad::Value& MtlModel::gamma(const std::string& well_id) {
  auto it = gamma_.find(well_id);
  if (it == gamma_.end()) throw UnknownWell(well_id);
  return it->second;
}

ad::Value& MtlModel::beta(const std::string& well_id) {
  auto it = beta_.find(well_id);
  if (it == beta_.end()) throw UnknownWell(well_id);
  return it->second;
}

const ad::Value& MtlModel::gamma(const std::string& well_id) const {
  auto it = gamma_.find(well_id);
  if (it == gamma_.end()) throw UnknownWell(well_id);
  return it->second;
}

const ad::Value& MtlModel::beta(const std::string& well_id) const {
  auto it = beta_.find(well_id);
  if (it == beta_.end()) throw UnknownWell(well_id);
  return it->second;
}

ad::Value MtlModel::forward(const Eigen::MatrixXd& feats,
                            const std::string& well_id) const {
  if (feats.rows() != 6) throw ad::ShapeMismatch("feature matrix must have 6 rows");
  const ad::Value& g = gamma(well_id);
  const ad::Value& b = beta(well_id);
  const Eigen::Index n = feats.cols();

  ad::Value u_row = ad::Value::constant(feats.row(0));
  ad::Value rest = ad::Value::constant(feats.bottomRows(5));
  ad::Value psi = adjust_choke(u_row, g, spec_.breakpoints);
  ad::Value z = ad::concat_rows(psi, rest);
  if (spec_.m_beta > 0) {
    z = ad::concat_rows(z, ad::broadcast_cols(b, n));
  }
  return net_.forward(z);
}

Eigen::RowVectorXd MtlModel::predict(const Eigen::MatrixXd& feats,
                                     const std::string& well_id) const {
  return forward(feats, well_id).data().row(0);
}

std::vector<ad::Value> MtlModel::parameters() const {
  std::vector<ad::Value> out = net_.parameters();
  for (const auto& p : task_parameters()) out.push_back(p);
  return out;
}

std::vector<ad::Value> MtlModel::task_parameters() const {
  std::vector<ad::Value> out;
  for (const auto& [id, g] : gamma_) {
    if (spec_.gamma_trainable) out.push_back(g);
  }
  for (const auto& [id, b] : beta_) {
    if (spec_.m_beta > 0) out.push_back(b);
  }
  return out;
}

long MtlModel::per_well_param_count() const {
  long per_well = spec_.m_beta;
  if (spec_.gamma_trainable) {
    per_well += static_cast<long>(spec_.breakpoints.size()) + 1;
  }
  return per_well;
}

long MtlModel::param_count() const {
  return shared_param_count() +
         per_well_param_count() * static_cast<long>(gamma_.size());
}

}  // namespace vfm
