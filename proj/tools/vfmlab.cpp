// vfmlab: synthetic-asset generation, model training, evaluation, and
// ablation experiments from the command line.
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "vfm/csv.hpp"
#include "vfm/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve_out(const fs::path& out) {
  // VFMLAB_OUT_ROOT reroots all relative output paths.
  const char* root = std::getenv("VFMLAB_OUT_ROOT");
  if (root && out.is_relative()) return fs::path(root) / out;
  return out;
}

int cmd_generate(const std::string& config_path, std::uint64_t seed,
                 const std::string& out) {
  vfm::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = vfm::load_experiment_config(config_path);
  cfg.seed = seed;
  auto data = vfm::generate_asset(
      cfg.generator.n_wells,
      vfm::default_benchmark_sampler(cfg.generator.n_assets), cfg.seed);
  const fs::path out_path = resolve_out(out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  vfm::save_dataset(data, out_path);

  json manifest;
  manifest["seed"] = cfg.seed;
  manifest["n_wells"] = cfg.generator.n_wells;
  manifest["n_assets"] = cfg.generator.n_assets;
  manifest["observations"] = data.size();
  std::ofstream os(out_path.string() + ".manifest.json");
  os << manifest.dump(2) << "\n";
  std::cout << "wrote " << data.size() << " observations for "
            << data.wells().size() << " wells to " << out_path << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::vector<std::string>& models, std::uint64_t seed,
              const std::string& out, int jobs, long epochs, bool grid) {
  vfm::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = vfm::load_experiment_config(config_path);
  if (!data_path.empty()) cfg.dataset_path = data_path;
  if (!models.empty()) cfg.models = models;
  for (const auto& m : cfg.models) vfm::model_type_from_string(m);
  if (seed != 0) cfg.seed = seed;
  if (!out.empty()) cfg.out_dir = out;
  cfg.out_dir = resolve_out(cfg.out_dir);
  if (jobs > 0) cfg.jobs = jobs;
  if (epochs > 0) cfg.hyper.epochs = epochs;
  if (grid) cfg.use_grid_search = true;

  auto result = vfm::run_experiment(cfg);
  std::cout << "bundle written to " << result.bundle_dir << "\n";
  for (const auto& name : result.report.model_names) {
    std::cout << "  " << name << ": mean trimmed MAPE "
              << result.report.mean_trimmed_mape(name) << ", sensitivity "
              << result.report.mean_sensitivity.at(name) << "\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& bundle, const std::string& data_path,
                 const std::string& out) {
  vfm::AssetDataset data = vfm::load_dataset(data_path);
  const fs::path bundle_dir(bundle);
  const fs::path splits = bundle_dir / "splits.csv";
  if (fs::exists(splits)) vfm::load_splits(data, splits);
  const fs::path report_dir =
      resolve_out(out.empty() ? (bundle_dir / "reports-eval").string() : out);
  fs::create_directories(report_dir);
  auto report = vfm::evaluate_bundle(bundle_dir, data, report_dir);
  std::cout << "evaluated " << report.model_names.size() << " model(s); report in "
            << report_dir << "\n";
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& data_path,
               const std::vector<std::uint64_t>& seeds,
               const std::vector<std::string>& variants,
               const std::string& out, long epochs) {
  vfm::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = vfm::load_experiment_config(config_path);
  if (!data_path.empty()) cfg.dataset_path = data_path;
  if (epochs > 0) cfg.hyper.epochs = epochs;

  std::vector<vfm::AblationVariant> vs;
  for (const auto& v : variants) vs.push_back(vfm::ablation_from_string(v));
  if (vs.empty()) {
    vs = {vfm::AblationVariant::Full, vfm::AblationVariant::NoBeta,
          vfm::AblationVariant::NoGamma, vfm::AblationVariant::NoBetaNoGamma};
  }

  const fs::path out_dir = resolve_out(out);
  fs::create_directories(out_dir);

  std::map<vfm::AblationVariant, std::vector<double>> mape_by_variant;
  for (std::uint64_t seed : seeds) {
    vfm::ExperimentConfig run_cfg = cfg;
    run_cfg.seed = seed;
    auto data = vfm::prepare_dataset(run_cfg);
    auto rows = vfm::ablation_report(data, run_cfg, seed, vs);
    std::ofstream os(out_dir / ("ablation_seed" + std::to_string(seed) + ".csv"));
    os << "variant,mean_trimmed_mape,mean_sensitivity\n";
    for (const auto& r : rows) {
      os << vfm::to_string(r.variant) << ',' << r.mean_trimmed_mape << ','
         << r.mean_sensitivity << "\n";
      mape_by_variant[r.variant].push_back(r.mean_trimmed_mape);
    }
  }
  std::ofstream os(out_dir / "ablation_aggregate.csv");
  os << "variant,mean_trimmed_mape\n";
  for (const auto& [variant, values] : mape_by_variant) {
    double sum = 0;
    for (double v : values) sum += v;
    os << vfm::to_string(variant) << ','
       << sum / static_cast<double>(values.size()) << "\n";
  }
  std::cout << "ablation tables written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-task virtual flow metering laboratory"};
  app.require_subcommand(1);

  std::string config_path, data_path, out, bundle;
  std::vector<std::string> models, variants;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::uint64_t seed = 1;
  int jobs = 0;
  long epochs = 0;
  bool grid = false;

  auto* generate = app.add_subcommand("generate", "generate a synthetic dataset CSV");
  generate->add_option("--config", config_path, "experiment config (JSON)");
  generate->add_option("--seed", seed, "root seed")->default_val(1);
  generate->add_option("--out", out, "output CSV path")->required();

  auto* train = app.add_subcommand("train", "train models into an artifact bundle");
  train->add_option("--config", config_path, "experiment config (JSON)");
  train->add_option("--data", data_path, "dataset CSV (omit to generate)");
  train->add_option("--models", models, "model families to train");
  train->add_option("--seed", seed, "root seed");
  train->add_option("--out", out, "bundle directory");
  train->add_option("--jobs", jobs, "parallel workers");
  train->add_option("--epochs", epochs, "override training epochs");
  train->add_flag("--grid", grid, "enable hyperparameter grid search");

  auto* evaluate = app.add_subcommand("evaluate", "evaluate a bundle on a dataset");
  evaluate->add_option("--bundle", bundle, "bundle directory")->required();
  evaluate->add_option("--data", data_path, "dataset CSV")->required();
  evaluate->add_option("--out", out, "report directory");

  auto* ablate = app.add_subcommand("ablate", "run the task-adaptation ablations");
  ablate->add_option("--config", config_path, "experiment config (JSON)");
  ablate->add_option("--data", data_path, "dataset CSV (omit to generate)");
  ablate->add_option("--seeds", seeds, "root seeds");
  ablate->add_option("--variants", variants, "subset of ablation variants");
  ablate->add_option("--out", out, "output directory")->required();
  ablate->add_option("--epochs", epochs, "override training epochs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) return cmd_generate(config_path, seed, out);
    if (train->parsed()) {
      return cmd_train(config_path, data_path, models, seed, out, jobs, epochs, grid);
    }
    if (evaluate->parsed()) return cmd_evaluate(bundle, data_path, out);
    if (ablate->parsed()) {
      return cmd_ablate(config_path, data_path, seeds, variants, out, epochs);
    }
  } catch (const vfm::ScenarioInfeasible& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
