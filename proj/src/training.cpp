#include "vfm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "vfm/optim.hpp"
#include "vfm/rng.hpp"

namespace vfm {

ModelSpec HyperConfig::to_spec(bool mtl) const {
  ModelSpec spec;
  spec.m_l = m_l;
  spec.m_h = m_h;
  spec.m_beta = mtl ? m_beta : 0;
  spec.gamma_trainable = mtl;
  return spec;
}

namespace {

std::map<std::string, std::vector<std::size_t>> group_by_well(
    const AssetDataset& data, const std::vector<std::size_t>& indices) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i : indices) groups[data.obs(i).well_id].push_back(i);
  return groups;
}

}  // namespace

ad::Value loss(const MtlModel& model, const AssetDataset& data,
               const Scaler& scaler, const std::vector<std::size_t>& batch,
               double lambda, double lambda_t) {
  if (batch.empty()) throw EmptyBatch();

  double weight_sum = 0;
  ad::Value weighted_se = ad::Value::scalar(0.0);
  for (const auto& [well_id, idx] : group_by_well(data, batch)) {
    const Eigen::MatrixXd feats = feature_matrix(data, scaler, idx);
    const Eigen::VectorXd y = scaled_targets(data, scaler, idx);
    const Eigen::VectorXd w = sample_weights(data, idx);
    weight_sum += w.sum();

    ad::Value pred = model.forward(feats, well_id);
    ad::Value diff = ad::sub(pred, ad::Value::constant(y.transpose()));
    ad::Value se = ad::mul(ad::Value::constant(w.transpose()), ad::square(diff));
    weighted_se = ad::add(weighted_se, ad::sum(se));
  }
  ad::Value total = ad::scale(weighted_se, 1.0 / weight_sum);

  if (lambda > 0) {
    for (const auto& p : model.network_regularized()) {
      total = ad::add(total, ad::scale(ad::sum(ad::square(p)), lambda));
    }
  }
  if (lambda_t > 0) {
    for (const auto& p : model.task_parameters()) {
      if (p.rows() == 0) continue;
      total = ad::add(total, ad::scale(ad::sum(ad::square(p)), lambda_t));
    }
  }
  return total;
}

double validation_loss(const MtlModel& model, const AssetDataset& data,
                       const Scaler& scaler,
                       const std::vector<std::size_t>& indices) {
  if (indices.empty()) return 0.0;
  double se = 0, wsum = 0;
  for (const auto& [well_id, idx] : group_by_well(data, indices)) {
    const Eigen::MatrixXd feats = feature_matrix(data, scaler, idx);
    const Eigen::VectorXd y = scaled_targets(data, scaler, idx);
    const Eigen::VectorXd w = sample_weights(data, idx);
    const Eigen::RowVectorXd pred = model.predict(feats, well_id);
    se += (w.transpose().array() * (pred - y.transpose()).array().square()).sum();
    wsum += w.sum();
  }
  return se / wsum;
}

TrainedNetModel train_network(ModelType type, const std::string& scope,
                              const ModelSpec& spec, const AssetDataset& data,
                              const Scaler& scaler,
                              const std::vector<std::size_t>& train_idx,
                              const std::vector<std::size_t>& val_idx,
                              const HyperConfig& hyper) {
  if (train_idx.empty()) throw EmptyBatch();
  const auto t0 = std::chrono::steady_clock::now();

  TrainedNetModel out;
  out.type = type;
  out.scope = scope;
  out.hyper = hyper;
  out.scaler = scaler;

  std::vector<std::string> wells;
  {
    std::map<std::string, bool> seen;
    for (std::size_t i : train_idx) seen[data.obs(i).well_id] = true;
    for (std::size_t i : val_idx) seen[data.obs(i).well_id] = true;
    for (const auto& [id, _] : seen) wells.push_back(id);
  }
  out.model = MtlModel(spec, wells, derive_seed(hyper.seed, 1));

  AdamW opt(out.model.parameters(), hyper.base_lr);
  std::vector<std::size_t> order = train_idx;
  auto shuffle_rng = make_rng(hyper.seed, 2);

  const int nb = std::max(1, hyper.batches_per_epoch);
  for (long epoch = 0; epoch < hyper.epochs; ++epoch) {
    opt.set_lr(lr_schedule(epoch, hyper.epochs, hyper.base_lr));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0;
    int batches = 0;
    const std::size_t n = order.size();
    for (int b = 0; b < nb; ++b) {
      const std::size_t lo = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(nb);
      const std::size_t hi = n * (static_cast<std::size_t>(b) + 1) / static_cast<std::size_t>(nb);
      if (lo == hi) continue;
      std::vector<std::size_t> batch(order.begin() + static_cast<long>(lo),
                                     order.begin() + static_cast<long>(hi));
      ad::Value L = loss(out.model, data, scaler, batch, hyper.lambda, hyper.lambda_t);
      const double lval = L.data()(0, 0);
      if (!std::isfinite(lval)) {
        throw NonFiniteLoss(to_string(type) + "/" + scope + " at epoch " +
                            std::to_string(epoch));
      }
      ad::backward(L);
      opt.step();
      epoch_loss += lval;
      ++batches;
    }
    out.train_trace.push_back(epoch_loss / std::max(1, batches));
    out.val_trace.push_back(validation_loss(out.model, data, scaler, val_idx));
  }
  out.final_val_loss = out.val_trace.empty() ? 0.0 : out.val_trace.back();
  out.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0).count();
  return out;
}

HyperConfig grid_search(ModelType type, const std::string& scope,
                        const AssetDataset& data, const Scaler& scaler,
                        const std::vector<std::size_t>& train_idx,
                        const std::vector<std::size_t>& val_idx,
                        const NetGrid& grid, const HyperConfig& base,
                        bool gamma_trainable) {
  const bool mtl = type == ModelType::MtlAsset || type == ModelType::MtlUniversal;
  std::vector<HyperConfig> configs;
  for (int m_l : grid.m_l) {
    for (int m_h : grid.m_h) {
      for (double lambda : grid.lambda) {
        HyperConfig c = base;
        c.m_l = m_l;
        c.m_h = m_h;
        c.lambda = lambda;
        if (!mtl) {
          c.m_beta = 0;
          c.lambda_t = 0;
          configs.push_back(c);
          continue;
        }
        for (int m_beta : grid.m_beta) {
          for (double lambda_t : grid.lambda_t) {
            c.m_beta = m_beta;
            c.lambda_t = lambda_t;
            configs.push_back(c);
          }
        }
      }
    }
  }
  if (configs.empty()) throw AllConfigsFailed();

  std::size_t n_wells = group_by_well(data, train_idx).size();
  struct Result {
    HyperConfig config;
    double val = 0;
    long params = 0;
  };
  std::vector<Result> results;
  for (const auto& c : configs) {
    try {
      ModelSpec spec = c.to_spec(mtl);
      spec.gamma_trainable = mtl && gamma_trainable;
      auto trained = train_network(type, scope, spec, data, scaler, train_idx,
                                   val_idx, c);
      results.push_back({c, trained.final_val_loss, mtl_param_count(spec, n_wells)});
    } catch (const NonFiniteLoss&) {
      // diverged configuration, skip
    }
  }
  if (results.empty()) throw AllConfigsFailed();

  const double best_val =
      std::min_element(results.begin(), results.end(), [](const Result& a, const Result& b) {
        return a.val < b.val;
      })->val;
  // Ties within 1% relative validation loss go to fewer parameters.
  const Result* pick = nullptr;
  for (const auto& r : results) {
    if (r.val <= best_val * 1.01) {
      if (!pick || r.params < pick->params ||
          (r.params == pick->params && r.val < pick->val)) {
        pick = &r;
      }
    }
  }
  return pick->config;
}

TrainedGbtModel train_gbt(const std::string& well_id, const AssetDataset& data,
                          const Scaler& scaler,
                          const std::vector<std::size_t>& train_idx,
                          const std::vector<std::size_t>& val_idx,
                          const GbtGrid& grid, const gbt::GbtConfig& base) {
  if (train_idx.empty()) throw gbt::EmptyData();
  const auto t0 = std::chrono::steady_clock::now();

  const Eigen::MatrixXd X = feature_matrix(data, scaler, train_idx).transpose();
  const Eigen::VectorXd y = scaled_targets(data, scaler, train_idx);
  const Eigen::VectorXd w = sample_weights(data, train_idx);
  const Eigen::MatrixXd Xv = feature_matrix(data, scaler, val_idx).transpose();
  const Eigen::VectorXd yv = scaled_targets(data, scaler, val_idx);
  const Eigen::VectorXd wv = sample_weights(data, val_idx);

  TrainedGbtModel best;
  best.well_id = well_id;
  best.scaler = scaler;
  double best_val = std::numeric_limits<double>::infinity();
  for (int depth : grid.max_depth) {
    for (double lambda : grid.lambda) {
      for (double gamma : grid.gamma) {
        gbt::GbtConfig cfg = base;
        cfg.max_depth = depth;
        cfg.lambda = lambda;
        cfg.gamma = gamma;
        gbt::BoostTrace trace;
        auto model = gbt::boost(X, y, w, cfg, Xv, yv, wv, &trace);
        const double vloss =
            Xv.rows() > 0 && trace.best_round > 0
                ? trace.validation_loss[static_cast<std::size_t>(trace.best_round - 1)]
                : (trace.train_loss.empty() ? 0.0 : trace.train_loss.back());
        if (vloss < best_val) {
          best_val = vloss;
          best.model = std::move(model);
          best.config = cfg;
          best.trace = std::move(trace);
          best.final_val_loss = vloss;
        }
      }
    }
  }
  best.wall_seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();
  return best;
}

}  // namespace vfm
