#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfm/dataset.hpp"
#include "vfm/gbt.hpp"
#include "vfm/models.hpp"

namespace vfm {

struct EmptyBatch : std::runtime_error {
  EmptyBatch() : std::runtime_error("empty batch") {}
};
struct NonFiniteLoss : std::runtime_error {
  explicit NonFiniteLoss(const std::string& what)
      : std::runtime_error("non-finite loss: " + what) {}
};
struct AllConfigsFailed : std::runtime_error {
  AllConfigsFailed() : std::runtime_error("no grid configuration trained successfully") {}
};

struct HyperConfig {
  int m_l = 4;
  int m_h = 16;
  double lambda = 1e-4;    // network L2
  int m_beta = 2;          // MTL only
  double lambda_t = 1e-3;  // task parameter L2, MTL only
  long epochs = 3000;
  int batches_per_epoch = 3;
  double base_lr = 1e-3;
  std::uint64_t seed = 0;

  ModelSpec to_spec(bool mtl) const;
};

// Full training objective on one batch:
//   sum w e^2 / sum w
//   + lambda  * ||network params except b1||^2
//   + lambda_t * sum_j (||beta_j||^2 + ||gamma_j||^2)
// Predictions and targets are in scaled units.
ad::Value loss(const MtlModel& model, const AssetDataset& data,
               const Scaler& scaler, const std::vector<std::size_t>& batch,
               double lambda, double lambda_t);

struct TrainedNetModel {
  ModelType type = ModelType::StlAnn;
  std::string scope;  // well_id (STL), asset_id (MTL-Asset), "all" (universal)
  MtlModel model;
  HyperConfig hyper;
  Scaler scaler;
  std::vector<double> train_trace;  // one entry per epoch
  std::vector<double> val_trace;
  double final_val_loss = 0;
  double wall_seconds = 0;
};

// Per epoch: global shuffle of the training points across wells, three
// near-equal batches, one optimizer step each; final model = final epoch.
// Deterministic for a fixed hyper.seed.
TrainedNetModel train_network(ModelType type, const std::string& scope,
                              const ModelSpec& spec, const AssetDataset& data,
                              const Scaler& scaler,
                              const std::vector<std::size_t>& train_idx,
                              const std::vector<std::size_t>& val_idx,
                              const HyperConfig& hyper);

// Weighted MSE of model predictions in scaled units (no regularization).
double validation_loss(const MtlModel& model, const AssetDataset& data,
                       const Scaler& scaler,
                       const std::vector<std::size_t>& indices);

struct NetGrid {
  std::vector<int> m_l = {4, 6};
  std::vector<int> m_h = {8, 16};
  std::vector<double> lambda = {1e-5, 1e-4, 1e-3};
  std::vector<int> m_beta = {1, 2, 4};          // MTL only
  std::vector<double> lambda_t = {1e-4, 1e-3, 1e-2};  // MTL only
};

// Trains every configuration and picks the lowest validation loss;
// configurations within 1% relative validation loss are tied and the tie
// goes to the smaller parameter count.
HyperConfig grid_search(ModelType type, const std::string& scope,
                        const AssetDataset& data, const Scaler& scaler,
                        const std::vector<std::size_t>& train_idx,
                        const std::vector<std::size_t>& val_idx,
                        const NetGrid& grid, const HyperConfig& base,
                        bool gamma_trainable = true);

struct TrainedGbtModel {
  std::string well_id;
  gbt::GbtModel model;
  gbt::GbtConfig config;
  Scaler scaler;
  gbt::BoostTrace trace;
  double final_val_loss = 0;
  double wall_seconds = 0;
};

struct GbtGrid {
  std::vector<int> max_depth = {2, 3};
  std::vector<double> lambda = {0.1, 1.0};
  std::vector<double> gamma = {0.0, 0.1};
};

TrainedGbtModel train_gbt(const std::string& well_id, const AssetDataset& data,
                          const Scaler& scaler,
                          const std::vector<std::size_t>& train_idx,
                          const std::vector<std::size_t>& val_idx,
                          const GbtGrid& grid, const gbt::GbtConfig& base);

}  // namespace vfm
