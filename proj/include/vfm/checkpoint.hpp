#pragma once

#include <filesystem>

#include "vfm/training.hpp"

namespace vfm {

// Versioned JSON checkpoint container. Network checkpoints carry the model
// type tag, hyperparameters, scaler, breakpoints, shared arrays, and
// per-well (gamma_j, beta_j) keyed by well_id; GBT checkpoints use the same
// container with type tag "gbt" and trees as nested node records.
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const TrainedNetModel& model,
                     const std::filesystem::path& path);
TrainedNetModel load_net_checkpoint(const std::filesystem::path& path);

void save_checkpoint(const TrainedGbtModel& model,
                     const std::filesystem::path& path);
TrainedGbtModel load_gbt_checkpoint(const std::filesystem::path& path);

// "net" or "gbt", read from the file's tag.
std::string checkpoint_kind(const std::filesystem::path& path);

}  // namespace vfm
