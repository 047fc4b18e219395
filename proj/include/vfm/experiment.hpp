#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vfm/checkpoint.hpp"
#include "vfm/report.hpp"
#include "vfm/splits.hpp"
#include "vfm/synth.hpp"
#include "vfm/training.hpp"

namespace vfm {

struct GeneratorConfig {
  std::size_t n_wells = 12;
  std::size_t n_assets = 2;
};

struct ExperimentConfig {
  std::string dataset_path;  // empty -> generate synthetically
  GeneratorConfig generator;
  std::vector<std::string> models = {"stl-gbt", "stl-ann", "mtl-asset",
                                     "mtl-universal"};
  std::uint64_t seed = 1;
  bool use_grid_search = false;
  NetGrid grid;
  GbtGrid gbt_grid;
  gbt::GbtConfig gbt_base;
  HyperConfig hyper;           // fixed hyper when grid search is off
  long search_epochs = 3000;   // per-configuration grid-search budget
  long final_epochs = 4000;    // from-scratch retrain of the selected config
  std::filesystem::path out_dir = "out";
  int jobs = 1;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Loads or generates the dataset, fits the scaler on development data, and
// assigns splits. Pure function of the config.
AssetDataset prepare_dataset(const ExperimentConfig& cfg);

// Predictors in physical units backed by trained checkpoints. STL families
// dispatch on well_id over the per-well models.
EvalModel make_eval_model(const std::string& name,
                          std::vector<TrainedNetModel> models);
EvalModel make_eval_model(const std::string& name,
                          std::vector<TrainedGbtModel> models);

struct ExperimentResult {
  EvaluationReport report;
  std::map<std::string, double> wall_seconds;  // by model family
  std::map<std::string, long> param_counts;
  std::filesystem::path bundle_dir;
};

// Trains every requested family, persists checkpoints / traces / reports
// under out_dir, and records per-model completion in manifest.json so an
// interrupted run resumes from the finished models.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Re-evaluates an existing bundle of checkpoints against a dataset;
// checkpoints that fail to load are listed in the failure manifest while
// the rest are still evaluated.
EvaluationReport evaluate_bundle(const std::filesystem::path& bundle_dir,
                                 const AssetDataset& data,
                                 const std::filesystem::path& report_dir);

struct AblationRow {
  AblationVariant variant = AblationVariant::Full;
  double mean_trimmed_mape = 0;
  double mean_sensitivity = 0;
};

// Trains the MTL-Universal ablation variants (fresh hyperparameters per
// variant when grid search is enabled) and tabulates average trimmed MAPE.
std::vector<AblationRow> ablation_report(
    const AssetDataset& data, const ExperimentConfig& cfg, std::uint64_t seed,
    const std::vector<AblationVariant>& variants = {
        AblationVariant::Full, AblationVariant::NoBeta,
        AblationVariant::NoGamma, AblationVariant::NoBetaNoGamma});

}  // namespace vfm
