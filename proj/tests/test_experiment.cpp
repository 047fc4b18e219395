#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "helpers.hpp"
#include "vfm/checkpoint.hpp"
#include "vfm/csv.hpp"
#include "vfm/experiment.hpp"

using namespace vfm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Byte content of every regular file under a directory, keyed by relative
// path, for byte-identity comparisons between runs.
std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
  }
  return out;
}

AssetDataset small_prepared() {
  AssetDataset data = testutil::make_training_dataset(1, 80, 5.0);
  assign_splits(data, 3);
  std::vector<std::size_t> dev;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.split(i) != SplitLabel::Test) dev.push_back(i);
  }
  data.set_scaler(fit_scaler(data, dev));
  return data;
}

}  // namespace

TEST_CASE("network checkpoints round trip bit for bit") {
  AssetDataset data = small_prepared();
  HyperConfig hyper;
  hyper.m_h = 6;
  hyper.epochs = 500;
  hyper.seed = 4;
  auto trained = train_network(ModelType::StlAnn, "W00", hyper.to_spec(false),
                               data, data.scaler(),
                               data.indices_with(SplitLabel::Train),
                               data.indices_with(SplitLabel::Validation), hyper);

  const fs::path path = fs::temp_directory_path() / "vfm_ckpt_net.json";
  save_checkpoint(trained, path);
  CHECK(checkpoint_kind(path) == "net");
  const TrainedNetModel loaded = load_net_checkpoint(path);

  CHECK(loaded.type == trained.type);
  CHECK(loaded.scope == trained.scope);
  CHECK(loaded.hyper.m_h == 6);
  CHECK(loaded.hyper.epochs == 500);
  CHECK(loaded.scaler.Q.shift == trained.scaler.Q.shift);
  CHECK(loaded.scaler.Q.scale == trained.scaler.Q.scale);
  CHECK(loaded.train_trace == trained.train_trace);
  CHECK(loaded.val_trace == trained.val_trace);
  CHECK(loaded.final_val_loss == trained.final_val_loss);

  const auto test_idx = data.well_indices_with("W00", SplitLabel::Test);
  const Eigen::MatrixXd X = feature_matrix(data, data.scaler(), test_idx);
  CHECK((loaded.model.predict(X, "W00") - trained.model.predict(X, "W00"))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  fs::remove(path);
}

TEST_CASE("MTL checkpoints restore the per-well task parameters") {
  AssetDataset data = testutil::make_training_dataset(2, 80, 5.0);
  assign_splits(data, 5);
  std::vector<std::size_t> dev;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.split(i) != SplitLabel::Test) dev.push_back(i);
  }
  data.set_scaler(fit_scaler(data, dev));

  HyperConfig hyper;
  hyper.m_h = 6;
  hyper.epochs = 500;
  hyper.seed = 6;
  auto trained = train_network(ModelType::MtlUniversal, "all",
                               hyper.to_spec(true), data, data.scaler(),
                               data.indices_with(SplitLabel::Train),
                               data.indices_with(SplitLabel::Validation), hyper);

  const fs::path path = fs::temp_directory_path() / "vfm_ckpt_mtl.json";
  save_checkpoint(trained, path);
  const TrainedNetModel loaded = load_net_checkpoint(path);
  for (const auto& id : trained.model.well_ids()) {
    CHECK(loaded.model.has_well(id));
    CHECK((loaded.model.gamma(id).data() - trained.model.gamma(id).data())
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((loaded.model.beta(id).data() - trained.model.beta(id).data())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  CHECK(loaded.model.spec().m_beta == trained.model.spec().m_beta);
  CHECK(loaded.model.spec().breakpoints == trained.model.spec().breakpoints);
  fs::remove(path);
}

TEST_CASE("GBT checkpoints round trip bit for bit") {
  AssetDataset data = small_prepared();
  GbtGrid grid;
  gbt::GbtConfig base;
  base.rounds = 40;
  auto trained = train_gbt("W00", data, data.scaler(),
                           data.indices_with(SplitLabel::Train),
                           data.indices_with(SplitLabel::Validation), grid, base);

  const fs::path path = fs::temp_directory_path() / "vfm_ckpt_gbt.json";
  save_checkpoint(trained, path);
  CHECK(checkpoint_kind(path) == "gbt");
  const TrainedGbtModel loaded = load_gbt_checkpoint(path);

  CHECK(loaded.well_id == "W00");
  CHECK(loaded.model.trees.size() == trained.model.trees.size());
  CHECK(loaded.config.max_depth == trained.config.max_depth);
  CHECK(loaded.trace.validation_loss == trained.trace.validation_loss);
  const auto test_idx = data.well_indices_with("W00", SplitLabel::Test);
  const Eigen::MatrixXd X =
      feature_matrix(data, data.scaler(), test_idx).transpose();
  CHECK((loaded.model.predict(X) - trained.model.predict(X))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // wrong-kind loads fail loudly
  CHECK_THROWS(load_net_checkpoint(path));
  fs::remove(path);
}

TEST_CASE("report writing is byte-deterministic") {
  AssetDataset data = small_prepared();
  EvalModel mech{"mechanistic", [](const WellObservation& o) {
                   return 30.0 * o.u * std::sqrt(o.p1 - o.p2) + 20.0;
                 }};
  const auto report = evaluate_models(data, {mech});
  REQUIRE(report.model_names == std::vector<std::string>{"mechanistic"});
  REQUIRE_FALSE(report.points.at("mechanistic").empty());
  CHECK(report.mean_sensitivity.at("mechanistic") == 0.0);

  const fs::path a = fs::temp_directory_path() / "vfm_report_a";
  const fs::path b = fs::temp_directory_path() / "vfm_report_b";
  fs::remove_all(a);
  fs::remove_all(b);
  write_report(report, a);
  write_report(report, b);
  const auto ba = dir_bytes(a), bb = dir_bytes(b);
  CHECK(ba.size() >= 7);
  CHECK(ba == bb);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("experiment configs load from JSON") {
  const fs::path path = fs::temp_directory_path() / "vfm_cfg.json";
  {
    std::ofstream os(path);
    os << R"({
      "generator": {"n_wells": 5, "n_assets": 2},
      "models": ["stl-ann", "mtl-universal"],
      "seed": 9,
      "grid_search": true,
      "search_epochs": 600,
      "final_epochs": 700,
      "jobs": 2,
      "out": "bundle-x",
      "hyper": {"m_l": 6, "m_h": 12, "lambda": 0.001, "m_beta": 3,
                 "lambda_t": 0.01, "epochs": 800},
      "grid": {"m_h": [8, 12], "lambda": [1e-4]}
    })";
  }
  const ExperimentConfig cfg = load_experiment_config(path);
  CHECK(cfg.generator.n_wells == 5);
  CHECK(cfg.models == std::vector<std::string>{"stl-ann", "mtl-universal"});
  CHECK(cfg.seed == 9);
  CHECK(cfg.use_grid_search);
  CHECK(cfg.search_epochs == 600);
  CHECK(cfg.final_epochs == 700);
  CHECK(cfg.jobs == 2);
  CHECK(cfg.out_dir == fs::path("bundle-x"));
  CHECK(cfg.hyper.m_l == 6);
  CHECK(cfg.hyper.m_h == 12);
  CHECK(cfg.hyper.m_beta == 3);
  CHECK(cfg.hyper.epochs == 800);
  CHECK(cfg.grid.m_h == std::vector<int>{8, 12});
  CHECK(cfg.grid.lambda == std::vector<double>{1e-4});

  {
    std::ofstream os(path);
    os << R"({"models": ["warp-drive"]})";
  }
  CHECK_THROWS_AS(load_experiment_config(path), std::invalid_argument);
  fs::remove(path);
}

TEST_CASE("the experiment pipeline trains, persists, resumes, and evaluates") {
  ExperimentConfig cfg;
  cfg.generator.n_wells = 4;
  cfg.generator.n_assets = 2;
  cfg.seed = 11;
  cfg.hyper.epochs = 500;
  cfg.hyper.m_h = 8;
  cfg.gbt_base.rounds = 60;
  cfg.out_dir = fs::temp_directory_path() / "vfm_bundle";
  fs::remove_all(cfg.out_dir);

  const ExperimentResult result = run_experiment(cfg);

  // Sequential stages over one trained bundle (subcases would retrain it
  // once per section).
  {
    INFO("artifacts land in the bundle");
    CHECK(fs::exists(cfg.out_dir / "manifest.json"));
    CHECK(fs::exists(cfg.out_dir / "dataset.csv"));
    CHECK(fs::exists(cfg.out_dir / "splits.csv"));
    for (const char* name :
         {"stl-gbt_W00.json", "stl-ann_W00.json", "stl-ann_W03.json",
          "mtl-asset_A0.json", "mtl-asset_A1.json", "mtl-universal_all.json"}) {
      CHECK(fs::exists(cfg.out_dir / "checkpoints" / name));
    }
    for (const char* name :
         {"table1_overall_abs_error.csv", "table2_well_error_summary.csv",
          "table3_asset_mape.csv", "table4_sensitivity.csv", "table7_params.csv",
          "wells.csv", "points.csv", "summary.json"}) {
      CHECK(fs::exists(cfg.out_dir / "reports" / name));
    }
    for (const char* name :
         {"fig3_choke_vs_pressure.csv", "fig4_pressure_boxplot.csv",
          "fig5_split_timeline.csv", "fig6_error_vs_weeks.csv",
          "fig7_p1_sweeps.csv", "fig8_beta_scatter.csv",
          "fig9_beta_response.csv"}) {
      CHECK(fs::exists(cfg.out_dir / "reports" / "figures" / name));
    }
    CHECK(fs::exists(cfg.out_dir / "traces" / "mtl-universal_all.csv"));
  }

  {
    INFO("the report covers every family with finite errors");
    CHECK(result.report.model_names ==
          std::vector<std::string>{"stl-gbt", "stl-ann", "mtl-asset",
                                   "mtl-universal"});
    for (const auto& name : result.report.model_names) {
      CHECK(result.report.wells.at(name).size() == 4);
      const double mape = result.report.mean_trimmed_mape(name);
      CHECK(std::isfinite(mape));
      CHECK(mape > 0.0);
      CHECK(result.report.mean_sensitivity.at(name) >= 0.0);
      CHECK(result.report.mean_sensitivity.at(name) <= 1.0);
    }
    CHECK(result.param_counts.at("mtl-universal") > 0);
  }

  {
    INFO("a rerun resumes from checkpoints and reproduces the reports");
    const auto before = dir_bytes(cfg.out_dir / "reports");
    const ExperimentResult again = run_experiment(cfg);
    const auto after = dir_bytes(cfg.out_dir / "reports");
    CHECK(before == after);
    CHECK(again.report.mean_trimmed_mape("mtl-universal") ==
          result.report.mean_trimmed_mape("mtl-universal"));
  }

  {
    INFO("bundle re-evaluation replays checkpoints against a stored dataset");
    AssetDataset data = load_dataset(cfg.out_dir / "dataset.csv");
    load_splits(data, cfg.out_dir / "splits.csv");

    // an unreadable checkpoint is reported, not fatal
    const fs::path bad = cfg.out_dir / "checkpoints" / "zz_broken.json";
    {
      std::ofstream os(bad);
      os << "{ not json";
    }
    const fs::path report_dir = fs::temp_directory_path() / "vfm_eval_report";
    fs::remove_all(report_dir);
    const EvaluationReport replay = evaluate_bundle(cfg.out_dir, data, report_dir);
    fs::remove(bad);

    CHECK(replay.model_names.size() == 4);
    for (const auto& name : result.report.model_names) {
      CHECK(std::find(replay.model_names.begin(), replay.model_names.end(),
                      name) != replay.model_names.end());
      // same checkpoints, same split: errors agree closely even though the
      // dataset crossed a CSV round trip
      CHECK(replay.mean_trimmed_mape(name) ==
            doctest::Approx(result.report.mean_trimmed_mape(name)).epsilon(1e-6));
    }
    CHECK(fs::exists(report_dir / "failures.json"));
    CHECK(slurp(report_dir / "failures.json").find("zz_broken") !=
          std::string::npos);
    fs::remove_all(report_dir);
  }

  {
    INFO("ablation variants train and tabulate");
    AssetDataset data = prepare_dataset(cfg);
    const auto rows = ablation_report(data, cfg, cfg.seed,
                                      {AblationVariant::Full,
                                       AblationVariant::NoBetaNoGamma});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].variant == AblationVariant::Full);
    CHECK(rows[1].variant == AblationVariant::NoBetaNoGamma);
    for (const auto& r : rows) {
      CHECK(std::isfinite(r.mean_trimmed_mape));
      CHECK(r.mean_trimmed_mape > 0.0);
      CHECK(r.mean_sensitivity >= 0.0);
      CHECK(r.mean_sensitivity <= 1.0);
    }
  }

  fs::remove_all(cfg.out_dir);
}
