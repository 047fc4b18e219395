#include "vfm/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "vfm/csv.hpp"
#include "vfm/rng.hpp"

namespace vfm {

namespace {

using nlohmann::json;

// Seed streams per model family.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kGbtStream = 10;
constexpr std::uint64_t kAnnStream = 11;
constexpr std::uint64_t kAssetStream = 12;
constexpr std::uint64_t kUniversalStream = 13;
constexpr std::uint64_t kAblationStream = 14;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

void run_tasks(std::vector<std::function<void()>>& tasks, int jobs) {
  if (jobs <= 1 || tasks.size() <= 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const int n = std::min<int>(jobs, static_cast<int>(tasks.size()));
  for (int i = 0; i < n; ++i) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= tasks.size()) return;
        tasks[k]();
      }
    });
  }
  for (auto& w : workers) w.join();
}

struct Manifest {
  std::filesystem::path path;
  json data = json::object();

  void load() {
    if (std::filesystem::exists(path)) data = read_json(path);
    if (!data.contains("completed")) data["completed"] = json::object();
  }
  bool is_complete(const std::string& key) const {
    return data.at("completed").contains(key);
  }
  void mark_complete(const std::string& key, const std::string& file,
                     double seconds) {
    data["completed"][key] = json{{"file", file}, {"seconds", seconds}};
    save();
  }
  void save() const {
    std::ofstream out(path);
    out << data.dump(2) << "\n";
  }
};

PointPredictor net_predictor(std::shared_ptr<const TrainedNetModel> m) {
  return [m](const WellObservation& o) {
    if (!m->model.has_well(o.well_id)) throw UnknownWell(o.well_id);
    Eigen::MatrixXd x(6, 1);
    x(0, 0) = m->scaler.u.apply(o.u);
    x(1, 0) = m->scaler.p1.apply(o.p1);
    x(2, 0) = m->scaler.p2.apply(o.p2);
    x(3, 0) = m->scaler.T.apply(o.T);
    x(4, 0) = o.phi_g;
    x(5, 0) = o.phi_o;
    return m->scaler.Q.invert(m->model.predict(x, o.well_id)(0));
  };
}

PointPredictor gbt_predictor(std::shared_ptr<const TrainedGbtModel> m) {
  return [m](const WellObservation& o) {
    Eigen::VectorXd x(6);
    x(0) = m->scaler.u.apply(o.u);
    x(1) = m->scaler.p1.apply(o.p1);
    x(2) = m->scaler.p2.apply(o.p2);
    x(3) = m->scaler.T.apply(o.T);
    x(4) = o.phi_g;
    x(5) = o.phi_o;
    return m->scaler.Q.invert(m->model.predict(x));
  };
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const json j = read_json(path);
  ExperimentConfig cfg;
  if (j.contains("dataset")) cfg.dataset_path = j.at("dataset").get<std::string>();
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    if (g.contains("n_wells")) cfg.generator.n_wells = g.at("n_wells").get<std::size_t>();
    if (g.contains("n_assets")) cfg.generator.n_assets = g.at("n_assets").get<std::size_t>();
  }
  if (j.contains("models")) cfg.models = j.at("models").get<std::vector<std::string>>();
  for (const auto& m : cfg.models) model_type_from_string(m);  // validate early
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("grid_search")) cfg.use_grid_search = j.at("grid_search").get<bool>();
  if (j.contains("search_epochs")) cfg.search_epochs = j.at("search_epochs").get<long>();
  if (j.contains("final_epochs")) cfg.final_epochs = j.at("final_epochs").get<long>();
  if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();
  if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  if (j.contains("hyper")) {
    const auto& h = j.at("hyper");
    if (h.contains("m_l")) cfg.hyper.m_l = h.at("m_l").get<int>();
    if (h.contains("m_h")) cfg.hyper.m_h = h.at("m_h").get<int>();
    if (h.contains("lambda")) cfg.hyper.lambda = h.at("lambda").get<double>();
    if (h.contains("m_beta")) cfg.hyper.m_beta = h.at("m_beta").get<int>();
    if (h.contains("lambda_t")) cfg.hyper.lambda_t = h.at("lambda_t").get<double>();
    if (h.contains("epochs")) cfg.hyper.epochs = h.at("epochs").get<long>();
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (g.contains("m_l")) cfg.grid.m_l = g.at("m_l").get<std::vector<int>>();
    if (g.contains("m_h")) cfg.grid.m_h = g.at("m_h").get<std::vector<int>>();
    if (g.contains("lambda")) cfg.grid.lambda = g.at("lambda").get<std::vector<double>>();
    if (g.contains("m_beta")) cfg.grid.m_beta = g.at("m_beta").get<std::vector<int>>();
    if (g.contains("lambda_t")) cfg.grid.lambda_t = g.at("lambda_t").get<std::vector<double>>();
  }
  return cfg;
}

AssetDataset prepare_dataset(const ExperimentConfig& cfg) {
  AssetDataset data =
      cfg.dataset_path.empty()
          ? generate_asset(cfg.generator.n_wells,
                           default_benchmark_sampler(cfg.generator.n_assets),
                           cfg.seed)
          : load_dataset(cfg.dataset_path);
  assign_splits(data, derive_seed(cfg.seed, kSplitStream));
  std::vector<std::size_t> dev;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.split(i) == SplitLabel::Train ||
        data.split(i) == SplitLabel::Validation) {
      dev.push_back(i);
    }
  }
  data.set_scaler(fit_scaler(data, dev));
  return data;
}

EvalModel make_eval_model(const std::string& name,
                          std::vector<TrainedNetModel> models) {
  auto shared = std::make_shared<std::vector<std::shared_ptr<const TrainedNetModel>>>();
  for (auto& m : models) {
    shared->push_back(std::make_shared<const TrainedNetModel>(std::move(m)));
  }
  return {name, [shared](const WellObservation& o) {
            for (const auto& m : *shared) {
              if (m->model.has_well(o.well_id)) return net_predictor(m)(o);
            }
            throw UnknownWell(o.well_id);
          }};
}

EvalModel make_eval_model(const std::string& name,
                          std::vector<TrainedGbtModel> models) {
  auto shared = std::make_shared<std::map<std::string, std::shared_ptr<const TrainedGbtModel>>>();
  for (auto& m : models) {
    // the key must be taken before the move: assignment sequences the RHS
    // (and its move) before the subscript
    std::string well_id = m.well_id;
    (*shared)[well_id] = std::make_shared<const TrainedGbtModel>(std::move(m));
  }
  return {name, [shared](const WellObservation& o) {
            auto it = shared->find(o.well_id);
            if (it == shared->end()) throw UnknownWell(o.well_id);
            return gbt_predictor(it->second)(o);
          }};
}

namespace {

void write_trace(const TrainedNetModel& m, const std::filesystem::path& path) {
  std::ofstream os(path);
  os << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < m.train_trace.size(); ++e) {
    os << e << ',' << m.train_trace[e] << ',' << m.val_trace[e] << "\n";
  }
}

// Grid search (when enabled) followed by a from-scratch final training.
TrainedNetModel train_with_selection(const ExperimentConfig& cfg,
                                     ModelType type, const std::string& scope,
                                     const AssetDataset& data,
                                     const std::vector<std::size_t>& train_idx,
                                     const std::vector<std::size_t>& val_idx,
                                     std::uint64_t seed) {
  const bool mtl = type == ModelType::MtlAsset || type == ModelType::MtlUniversal;
  HyperConfig hyper = cfg.hyper;
  hyper.seed = seed;
  if (cfg.use_grid_search) {
    HyperConfig search = hyper;
    search.epochs = cfg.search_epochs;
    hyper = grid_search(type, scope, data, data.scaler(), train_idx, val_idx,
                        cfg.grid, search);
    hyper.epochs = cfg.final_epochs;
    hyper.seed = derive_seed(seed, 1);
  }
  return train_network(type, scope, hyper.to_spec(mtl), data, data.scaler(),
                       train_idx, val_idx, hyper);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  AssetDataset data = prepare_dataset(cfg);
  const auto dir = cfg.out_dir;
  std::filesystem::create_directories(dir / "checkpoints");
  std::filesystem::create_directories(dir / "traces");
  std::filesystem::create_directories(dir / "reports");

  Manifest manifest{dir / "manifest.json"};
  manifest.load();
  manifest.data["seed"] = cfg.seed;
  manifest.data["models"] = cfg.models;

  save_dataset(data, dir / "dataset.csv");
  save_splits(data, dir / "splits.csv");

  const auto wells = data.well_ids();
  auto train_of = [&](const std::vector<std::string>& scope_wells) {
    std::vector<std::size_t> idx;
    for (const auto& w : scope_wells) {
      auto wi = data.well_indices_with(w, SplitLabel::Train);
      idx.insert(idx.end(), wi.begin(), wi.end());
    }
    return idx;
  };
  auto val_of = [&](const std::vector<std::string>& scope_wells) {
    std::vector<std::size_t> idx;
    for (const auto& w : scope_wells) {
      auto wi = data.well_indices_with(w, SplitLabel::Validation);
      idx.insert(idx.end(), wi.begin(), wi.end());
    }
    return idx;
  };

  ExperimentResult result;
  result.bundle_dir = dir;
  std::vector<EvalModel> eval_models;
  auto wants = [&](const std::string& name) {
    return std::find(cfg.models.begin(), cfg.models.end(), name) != cfg.models.end();
  };

  if (wants("stl-gbt")) {
    std::vector<TrainedGbtModel> models(wells.size());
    std::vector<std::function<void()>> tasks;
    double total_seconds = 0;
    for (std::size_t w = 0; w < wells.size(); ++w) {
      const std::string key = "stl-gbt/" + wells[w];
      const auto file = dir / "checkpoints" / ("stl-gbt_" + wells[w] + ".json");
      if (manifest.is_complete(key)) {
        models[w] = load_gbt_checkpoint(file);
        continue;
      }
      tasks.push_back([&, w, file] {
        models[w] = train_gbt(wells[w], data, data.scaler(), train_of({wells[w]}),
                              val_of({wells[w]}), cfg.gbt_grid, cfg.gbt_base);
        save_checkpoint(models[w], file);
      });
    }
    run_tasks(tasks, cfg.jobs);
    for (std::size_t w = 0; w < wells.size(); ++w) {
      const std::string key = "stl-gbt/" + wells[w];
      total_seconds += models[w].wall_seconds;
      if (!manifest.is_complete(key)) {
        manifest.mark_complete(key, "checkpoints/stl-gbt_" + wells[w] + ".json",
                               models[w].wall_seconds);
      }
    }
    result.wall_seconds["stl-gbt"] = total_seconds;
    eval_models.push_back(make_eval_model("stl-gbt", std::move(models)));
  }

  auto run_net_family = [&](const std::string& family, ModelType type,
                            std::uint64_t stream,
                            const std::vector<std::pair<std::string, std::vector<std::string>>>& scopes) {
    std::vector<TrainedNetModel> models(scopes.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t s = 0; s < scopes.size(); ++s) {
      const std::string key = family + "/" + scopes[s].first;
      const auto file = dir / "checkpoints" / (family + "_" + scopes[s].first + ".json");
      if (manifest.is_complete(key)) {
        models[s] = load_net_checkpoint(file);
        continue;
      }
      tasks.push_back([&, s, file] {
        models[s] = train_with_selection(
            cfg, type, scopes[s].first, data, train_of(scopes[s].second),
            val_of(scopes[s].second), derive_seed(derive_seed(cfg.seed, stream), s));
        save_checkpoint(models[s], file);
        write_trace(models[s], dir / "traces" / (family + "_" + scopes[s].first + ".csv"));
      });
    }
    run_tasks(tasks, cfg.jobs);
    double total_seconds = 0;
    long params = 0;
    for (std::size_t s = 0; s < scopes.size(); ++s) {
      const std::string key = family + "/" + scopes[s].first;
      total_seconds += models[s].wall_seconds;
      params += models[s].model.param_count();
      if (!manifest.is_complete(key)) {
        manifest.mark_complete(key, "checkpoints/" + family + "_" + scopes[s].first + ".json",
                               models[s].wall_seconds);
      }
    }
    result.wall_seconds[family] = total_seconds;
    result.param_counts[family] = params;
    eval_models.push_back(make_eval_model(family, std::move(models)));
  };

  if (wants("stl-ann")) {
    std::vector<std::pair<std::string, std::vector<std::string>>> scopes;
    for (const auto& w : wells) scopes.emplace_back(w, std::vector<std::string>{w});
    run_net_family("stl-ann", ModelType::StlAnn, kAnnStream, scopes);
  }
  if (wants("mtl-asset")) {
    std::vector<std::pair<std::string, std::vector<std::string>>> scopes;
    for (const auto& a : data.asset_ids()) {
      scopes.emplace_back(a, data.wells_of_asset(a));
    }
    run_net_family("mtl-asset", ModelType::MtlAsset, kAssetStream, scopes);
  }
  if (wants("mtl-universal")) {
    std::vector<std::pair<std::string, std::vector<std::string>>> scopes;
    scopes.emplace_back("all", wells);
    run_net_family("mtl-universal", ModelType::MtlUniversal, kUniversalStream, scopes);
  }

  result.report = evaluate_models(data, eval_models);
  result.report.metadata["seed"] = std::to_string(cfg.seed);

  // Table 7 analogue: parameter accounting lives in the reports, wall-clock
  // only in the manifest so reruns stay byte-identical.
  {
    std::ofstream os(dir / "reports" / "table7_params.csv");
    os << "model,parameters\n";
    for (const auto& [family, params] : result.param_counts) {
      os << family << ',' << params << "\n";
    }
  }
  for (const auto& [family, seconds] : result.wall_seconds) {
    manifest.data["wall_seconds"][family] = seconds;
  }
  manifest.save();

  write_report(result.report, dir / "reports");

  const MtlModel* universal = nullptr;
  const Scaler* universal_scaler = nullptr;
  std::optional<TrainedNetModel> universal_ckpt;
  if (wants("mtl-universal")) {
    universal_ckpt =
        load_net_checkpoint(dir / "checkpoints" / "mtl-universal_all.json");
    universal = &universal_ckpt->model;
    universal_scaler = &universal_ckpt->scaler;
  }
  emit_plot_data(data, result.report, dir / "reports" / "figures", universal,
                 universal_scaler);
  return result;
}

EvaluationReport evaluate_bundle(const std::filesystem::path& bundle_dir,
                                 const AssetDataset& data,
                                 const std::filesystem::path& report_dir) {
  std::map<std::string, std::vector<TrainedNetModel>> net_groups;
  std::vector<TrainedGbtModel> gbt_models;
  json failures = json::array();

  std::vector<std::filesystem::path> files;
  const auto ckpt_dir = bundle_dir / "checkpoints";
  if (std::filesystem::exists(ckpt_dir)) {
    for (const auto& e : std::filesystem::directory_iterator(ckpt_dir)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      if (checkpoint_kind(f) == "gbt") {
        gbt_models.push_back(load_gbt_checkpoint(f));
      } else {
        auto m = load_net_checkpoint(f);
        net_groups[to_string(m.type)].push_back(std::move(m));
      }
    } catch (const std::exception& e) {
      failures.push_back(json{{"file", f.string()}, {"error", e.what()}});
    }
  }

  std::vector<EvalModel> eval_models;
  if (!gbt_models.empty()) {
    eval_models.push_back(make_eval_model("stl-gbt", std::move(gbt_models)));
  }
  for (auto& [name, models] : net_groups) {
    eval_models.push_back(make_eval_model(name, std::move(models)));
  }

  auto report = evaluate_models(data, eval_models);
  write_report(report, report_dir);
  if (!failures.empty()) {
    std::ofstream os(report_dir / "failures.json");
    os << failures.dump(2) << "\n";
  }
  return report;
}

std::vector<AblationRow> ablation_report(
    const AssetDataset& data, const ExperimentConfig& cfg, std::uint64_t seed,
    const std::vector<AblationVariant>& variants) {
  std::vector<std::size_t> train_idx = data.indices_with(SplitLabel::Train);
  std::vector<std::size_t> val_idx = data.indices_with(SplitLabel::Validation);

  std::vector<AblationRow> rows;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    HyperConfig hyper = cfg.hyper;
    hyper.seed = derive_seed(derive_seed(seed, kAblationStream), v);
    if (cfg.use_grid_search) {
      // fresh hyperparameters per ablation
      HyperConfig search = hyper;
      search.epochs = cfg.search_epochs;
      const bool gamma_on = variants[v] == AblationVariant::Full ||
                            variants[v] == AblationVariant::NoBeta;
      hyper = grid_search(ModelType::MtlUniversal, to_string(variants[v]), data,
                          data.scaler(), train_idx, val_idx, cfg.grid, search,
                          gamma_on);
      hyper.epochs = cfg.final_epochs;
      hyper.seed = derive_seed(derive_seed(seed, kAblationStream), 100 + v);
    }
    ModelSpec spec = build_ablation(hyper.to_spec(true), variants[v]);
    auto trained = train_network(ModelType::MtlUniversal, to_string(variants[v]),
                                 spec, data, data.scaler(), train_idx, val_idx,
                                 hyper);
    auto model = std::make_shared<const TrainedNetModel>(std::move(trained));
    EvalModel em{to_string(variants[v]), net_predictor(model)};
    auto report = evaluate_models(data, {em});
    AblationRow row;
    row.variant = variants[v];
    row.mean_trimmed_mape = report.mean_trimmed_mape(em.name);
    row.mean_sensitivity = report.mean_sensitivity.at(em.name);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace vfm
