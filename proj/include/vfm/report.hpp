#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vfm/dataset.hpp"
#include "vfm/metrics.hpp"
#include "vfm/models.hpp"

namespace vfm {

// One model column of the evaluation: a display name plus a predictor in
// physical units that can be queried at any observation.
struct EvalModel {
  std::string name;
  PointPredictor predict;
};

struct PointRecord {
  std::string well_id;
  std::string asset_id;
  double t = 0;
  double weeks_since_train = 0;
  double error = 0;  // signed percentage error
  int sensitivity = 0;
};

struct WellRecord {
  std::string well_id;
  std::string asset_id;
  std::size_t n_points = 0;
  double trimmed_mape = 0;
  double trimmed_rmse = 0;
  double sensitivity = 0;
};

// Per-well and aggregate error tables for a set of models on the test split.
struct EvaluationReport {
  std::vector<std::string> model_names;
  std::map<std::string, std::vector<PointRecord>> points;      // by model
  std::map<std::string, std::vector<WellRecord>> wells;        // by model
  std::map<std::string, PercentileSummary> overall_abs_error;  // by model
  std::map<std::string, PercentileSummary> well_mape_summary;
  std::map<std::string, PercentileSummary> well_rmse_summary;
  std::map<std::string, std::map<std::string, double>> asset_mape;  // model -> asset
  std::map<std::string, double> mean_sensitivity;  // mean S_j over wells
  // model -> week bucket -> summary of |e|
  std::map<std::string, std::map<int, PercentileSummary>> weekly_abs_error;
  std::map<std::string, std::string> metadata;  // configs, seeds, timings

  double mean_trimmed_mape(const std::string& model) const;
};

EvaluationReport evaluate_models(const AssetDataset& data,
                                 const std::vector<EvalModel>& models);

// Writes one CSV per table analogue plus a JSON summary manifest.
void write_report(const EvaluationReport& report,
                  const std::filesystem::path& dir);

// Tidy CSVs backing the figure analogues: choke-vs-pressure scatter,
// per-well pressure boxplot data, split timeline, error-vs-weeks boxes,
// upstream-pressure sensitivity sweeps, task-parameter scatter and
// response curves over the adjusted choke.
void emit_plot_data(const AssetDataset& data, const EvaluationReport& report,
                    const std::filesystem::path& dir,
                    const MtlModel* universal = nullptr,
                    const Scaler* universal_scaler = nullptr);

}  // namespace vfm
