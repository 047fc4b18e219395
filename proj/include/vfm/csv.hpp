#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "vfm/dataset.hpp"

namespace vfm {

struct MissingColumn : std::runtime_error {
  explicit MissingColumn(const std::string& name)
      : std::runtime_error("missing column: " + name) {}
};

struct ParseFailure : std::runtime_error {
  ParseFailure(std::size_t row, const std::string& what)
      : std::runtime_error("row " + std::to_string(row) + ": " + what) {}
};

// Dataset CSV schema (UTF-8, header row):
//   well_id, asset_id, t_days, choke_pct, p1_bar, p2_bar, temp_c,
//   phi_g, phi_o, phi_w, qg_ksm3d, qo_sm3d, qw_sm3d, source
// choke_pct is percent of full travel (0-100); qg_ksm3d is gas rate already
// in thousand-Sm3/d liquid equivalents. Sample weights are derived from the
// source column, not stored.
AssetDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const AssetDataset& data, const std::filesystem::path& path);

// Sidecar split export/import: well_id, t_days, split.
void save_splits(const AssetDataset& data, const std::filesystem::path& path);
void load_splits(AssetDataset& data, const std::filesystem::path& path);

}  // namespace vfm
