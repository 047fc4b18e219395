#include "vfm/checkpoint.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace vfm {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(),
                    j.at("cols").get<Eigen::Index>());
  const auto& rows = j.at("data");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rows.at(static_cast<std::size_t>(r))
                    .at(static_cast<std::size_t>(c))
                    .get<double>();
    }
  }
  return m;
}

json transform_to_json(const AffineTransform& t) {
  return json{{"shift", t.shift}, {"scale", t.scale}};
}

AffineTransform transform_from_json(const json& j) {
  return {j.at("shift").get<double>(), j.at("scale").get<double>()};
}

json scaler_to_json(const Scaler& s) {
  return json{{"u", transform_to_json(s.u)},
              {"p1", transform_to_json(s.p1)},
              {"p2", transform_to_json(s.p2)},
              {"T", transform_to_json(s.T)},
              {"Q", transform_to_json(s.Q)}};
}

Scaler scaler_from_json(const json& j) {
  Scaler s;
  s.u = transform_from_json(j.at("u"));
  s.p1 = transform_from_json(j.at("p1"));
  s.p2 = transform_from_json(j.at("p2"));
  s.T = transform_from_json(j.at("T"));
  s.Q = transform_from_json(j.at("Q"));
  return s;
}

json hyper_to_json(const HyperConfig& h) {
  return json{{"m_l", h.m_l},           {"m_h", h.m_h},
              {"lambda", h.lambda},     {"m_beta", h.m_beta},
              {"lambda_t", h.lambda_t}, {"epochs", h.epochs},
              {"batches_per_epoch", h.batches_per_epoch},
              {"base_lr", h.base_lr},   {"seed", h.seed}};
}

HyperConfig hyper_from_json(const json& j) {
  HyperConfig h;
  h.m_l = j.at("m_l").get<int>();
  h.m_h = j.at("m_h").get<int>();
  h.lambda = j.at("lambda").get<double>();
  h.m_beta = j.at("m_beta").get<int>();
  h.lambda_t = j.at("lambda_t").get<double>();
  h.epochs = j.at("epochs").get<long>();
  h.batches_per_epoch = j.at("batches_per_epoch").get<int>();
  h.base_lr = j.at("base_lr").get<double>();
  h.seed = j.at("seed").get<std::uint64_t>();
  return h;
}

json read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

void write_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

void save_checkpoint(const TrainedNetModel& model,
                     const std::filesystem::path& path) {
  json j;
  j["version"] = kCheckpointVersion;
  j["kind"] = "net";
  j["model_type"] = to_string(model.type);
  j["scope"] = model.scope;
  j["hyper"] = hyper_to_json(model.hyper);
  j["scaler"] = scaler_to_json(model.scaler);
  j["final_val_loss"] = model.final_val_loss;
  j["wall_seconds"] = model.wall_seconds;
  j["train_trace"] = model.train_trace;
  j["val_trace"] = model.val_trace;

  const auto& spec = model.model.spec();
  j["spec"] = json{{"m_l", spec.m_l},
                   {"m_h", spec.m_h},
                   {"m_beta", spec.m_beta},
                   {"gamma_trainable", spec.gamma_trainable},
                   {"breakpoints", spec.breakpoints}};
  json weights = json::array(), biases = json::array();
  for (const auto& W : model.model.net().weights()) {
    weights.push_back(matrix_to_json(W.data()));
  }
  for (const auto& b : model.model.net().biases()) {
    biases.push_back(matrix_to_json(b.data()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  json wells = json::object();
  for (const auto& id : model.model.well_ids()) {
    wells[id] = json{{"gamma", matrix_to_json(model.model.gamma(id).data())},
                     {"beta", matrix_to_json(model.model.beta(id).data())}};
  }
  j["wells"] = std::move(wells);
  write_file(j, path);
}

TrainedNetModel load_net_checkpoint(const std::filesystem::path& path) {
  const json j = read_file(path);
  if (j.at("kind").get<std::string>() != "net") {
    throw std::runtime_error(path.string() + " is not a network checkpoint");
  }
  TrainedNetModel out;
  out.type = model_type_from_string(j.at("model_type").get<std::string>());
  out.scope = j.at("scope").get<std::string>();
  out.hyper = hyper_from_json(j.at("hyper"));
  out.scaler = scaler_from_json(j.at("scaler"));
  out.final_val_loss = j.at("final_val_loss").get<double>();
  out.wall_seconds = j.at("wall_seconds").get<double>();
  out.train_trace = j.at("train_trace").get<std::vector<double>>();
  out.val_trace = j.at("val_trace").get<std::vector<double>>();

  ModelSpec spec;
  spec.m_l = j.at("spec").at("m_l").get<int>();
  spec.m_h = j.at("spec").at("m_h").get<int>();
  spec.m_beta = j.at("spec").at("m_beta").get<int>();
  spec.gamma_trainable = j.at("spec").at("gamma_trainable").get<bool>();
  spec.breakpoints = j.at("spec").at("breakpoints").get<std::vector<double>>();

  std::vector<std::string> wells;
  for (const auto& [id, _] : j.at("wells").items()) wells.push_back(id);
  out.model = MtlModel(spec, wells, 0);
  auto& W = out.model.net().weights();
  auto& b = out.model.net().biases();
  for (std::size_t k = 0; k < W.size(); ++k) {
    W[k].data() = matrix_from_json(j.at("weights").at(k));
    b[k].data() = matrix_from_json(j.at("biases").at(k));
  }
  for (const auto& id : wells) {
    out.model.gamma(id).data() = matrix_from_json(j.at("wells").at(id).at("gamma"));
    out.model.beta(id).data() = matrix_from_json(j.at("wells").at(id).at("beta"));
  }
  return out;
}

void save_checkpoint(const TrainedGbtModel& model,
                     const std::filesystem::path& path) {
  json j;
  j["version"] = kCheckpointVersion;
  j["kind"] = "gbt";
  j["model_type"] = "stl-gbt";
  j["well_id"] = model.well_id;
  j["scaler"] = scaler_to_json(model.scaler);
  j["base_score"] = model.model.base_score;
  j["shrinkage"] = model.model.shrinkage;
  j["lambda"] = model.model.lambda;
  j["gamma"] = model.model.gamma;
  j["final_val_loss"] = model.final_val_loss;
  j["wall_seconds"] = model.wall_seconds;
  j["trace"] = json{{"train_loss", model.trace.train_loss},
                    {"validation_loss", model.trace.validation_loss},
                    {"best_round", model.trace.best_round}};
  j["config"] = json{{"rounds", model.config.rounds},
                     {"max_depth", model.config.max_depth},
                     {"shrinkage", model.config.shrinkage},
                     {"lambda", model.config.lambda},
                     {"gamma", model.config.gamma},
                     {"early_stopping_patience", model.config.early_stopping_patience}};
  json trees = json::array();
  for (const auto& tree : model.model.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back(json{{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"leaf_weight", n.leaf_weight},
                           {"left", n.left},
                           {"right", n.right}});
    }
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  write_file(j, path);
}

TrainedGbtModel load_gbt_checkpoint(const std::filesystem::path& path) {
  const json j = read_file(path);
  if (j.at("kind").get<std::string>() != "gbt") {
    throw std::runtime_error(path.string() + " is not a GBT checkpoint");
  }
  TrainedGbtModel out;
  out.well_id = j.at("well_id").get<std::string>();
  out.scaler = scaler_from_json(j.at("scaler"));
  out.model.base_score = j.at("base_score").get<double>();
  out.model.shrinkage = j.at("shrinkage").get<double>();
  out.model.lambda = j.at("lambda").get<double>();
  out.model.gamma = j.at("gamma").get<double>();
  out.final_val_loss = j.at("final_val_loss").get<double>();
  out.wall_seconds = j.at("wall_seconds").get<double>();
  out.trace.train_loss = j.at("trace").at("train_loss").get<std::vector<double>>();
  out.trace.validation_loss =
      j.at("trace").at("validation_loss").get<std::vector<double>>();
  out.trace.best_round = j.at("trace").at("best_round").get<int>();
  out.config.rounds = j.at("config").at("rounds").get<int>();
  out.config.max_depth = j.at("config").at("max_depth").get<int>();
  out.config.shrinkage = j.at("config").at("shrinkage").get<double>();
  out.config.lambda = j.at("config").at("lambda").get<double>();
  out.config.gamma = j.at("config").at("gamma").get<double>();
  out.config.early_stopping_patience =
      j.at("config").at("early_stopping_patience").get<int>();
  for (const auto& tj : j.at("trees")) {
    gbt::RegressionTree tree;
    for (const auto& nj : tj) {
      gbt::TreeNode n;
      n.feature = nj.at("feature").get<int>();
      n.threshold = nj.at("threshold").get<double>();
      n.leaf_weight = nj.at("leaf_weight").get<double>();
      n.left = nj.at("left").get<int>();
      n.right = nj.at("right").get<int>();
      tree.nodes.push_back(n);
    }
    out.model.trees.push_back(std::move(tree));
  }
  return out;
}

std::string checkpoint_kind(const std::filesystem::path& path) {
  return read_file(path).at("kind").get<std::string>();
}

}  // namespace vfm
