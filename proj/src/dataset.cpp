#include "vfm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace vfm {

std::string to_string(Source s) {
  return s == Source::Separator ? "SEP" : "MPFM";
}

std::string to_string(SplitLabel s) {
  switch (s) {
    case SplitLabel::Train: return "train";
    case SplitLabel::Validation: return "validation";
    case SplitLabel::Test: return "test";
    case SplitLabel::Unassigned: return "unassigned";
  }
  return "unassigned";
}

Source source_from_string(const std::string& s) {
  if (s == "SEP" || s == "sep" || s == "separator") return Source::Separator;
  if (s == "MPFM" || s == "mpfm") return Source::Mpfm;
  throw std::invalid_argument("unknown source tag: " + s);
}

SplitLabel split_from_string(const std::string& s) {
  if (s == "train") return SplitLabel::Train;
  if (s == "validation") return SplitLabel::Validation;
  if (s == "test") return SplitLabel::Test;
  if (s == "unassigned") return SplitLabel::Unassigned;
  throw std::invalid_argument("unknown split label: " + s);
}

double source_weight(Source s) { return s == Source::Mpfm ? 0.1 : 1.0; }

void validate_observation(const WellObservation& o) {
  auto fail = [&](const std::string& reason) {
    throw InvariantViolation("well " + o.well_id + " t=" + std::to_string(o.t) +
                             ": " + reason);
  };
  auto finite = [](double x) { return std::isfinite(x); };
  for (double v : {o.t, o.u, o.p1, o.p2, o.T, o.phi_g, o.phi_o, o.phi_w,
                   o.q_g, o.q_o, o.q_w, o.weight}) {
    if (!finite(v)) fail("non-finite value");
  }
  if (o.t < 0) fail("negative time");
  if (o.u < 0 || o.u > 1) fail("choke opening outside [0,1]");
  if (!(o.p1 >= o.p2 && o.p2 >= 0)) fail("pressure ordering p1 >= p2 >= 0 violated");
  for (double f : {o.phi_g, o.phi_o, o.phi_w}) {
    if (f < 0 || f > 1) fail("composition fraction outside [0,1]");
  }
  if (std::abs(o.phi_g + o.phi_o + o.phi_w - 1.0) > 1e-9) {
    fail("composition fractions do not sum to 1");
  }
  const double Q = o.total_rate();
  if (!(Q > 0)) fail("non-positive total rate");
  if (std::abs(o.q_g - Q * o.phi_g) > 1e-9 * std::max(1.0, Q) ||
      std::abs(o.q_o - Q * o.phi_o) > 1e-9 * std::max(1.0, Q) ||
      std::abs(o.q_w - Q * o.phi_w) > 1e-9 * std::max(1.0, Q)) {
    fail("rates inconsistent with composition (q != Q*phi)");
  }
  const double expected_w = source_weight(o.source);
  if (std::abs(o.weight - expected_w) > 1e-12) {
    fail("weight does not match source rule");
  }
}

AssetDataset::AssetDataset(std::vector<WellObservation> observations)
    : obs_(std::move(observations)), splits_(obs_.size(), SplitLabel::Unassigned) {
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    wells_[obs_[i].well_id].push_back(i);
    auto it = well_asset_.find(obs_[i].well_id);
    if (it == well_asset_.end()) {
      well_asset_[obs_[i].well_id] = obs_[i].asset_id;
    } else if (it->second != obs_[i].asset_id) {
      throw InvariantViolation("well " + obs_[i].well_id +
                               " appears in multiple assets");
    }
  }
  for (auto& [id, idx] : wells_) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return obs_[a].t < obs_[b].t;
    });
  }
}

std::vector<std::string> AssetDataset::well_ids() const {
  std::vector<std::string> ids;
  ids.reserve(wells_.size());
  for (const auto& [id, _] : wells_) ids.push_back(id);
  return ids;
}

std::vector<std::string> AssetDataset::asset_ids() const {
  std::set<std::string> assets;
  for (const auto& [_, a] : well_asset_) assets.insert(a);
  return {assets.begin(), assets.end()};
}

const std::string& AssetDataset::asset_of(const std::string& well_id) const {
  auto it = well_asset_.find(well_id);
  if (it == well_asset_.end()) {
    throw std::out_of_range("unknown well: " + well_id);
  }
  return it->second;
}

std::vector<std::string> AssetDataset::wells_of_asset(
    const std::string& asset_id) const {
  std::vector<std::string> ids;
  for (const auto& [w, a] : well_asset_) {
    if (a == asset_id) ids.push_back(w);
  }
  return ids;
}

void AssetDataset::set_splits(std::vector<SplitLabel> labels) {
  if (labels.size() != obs_.size()) {
    throw std::invalid_argument("split label count does not match dataset");
  }
  // Every test point must come strictly after all development points of
  // its well.
  for (const auto& [id, idx] : wells_) {
    double max_dev = -std::numeric_limits<double>::infinity();
    double min_test = std::numeric_limits<double>::infinity();
    for (std::size_t i : idx) {
      if (labels[i] == SplitLabel::Test) {
        min_test = std::min(min_test, obs_[i].t);
      } else if (labels[i] != SplitLabel::Unassigned) {
        max_dev = std::max(max_dev, obs_[i].t);
      }
    }
    if (min_test <= max_dev) {
      throw InvariantViolation("well " + id +
                               ": test observations overlap development in time");
    }
  }
  splits_ = std::move(labels);
}

std::vector<std::size_t> AssetDataset::indices_with(SplitLabel label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < obs_.size(); ++i) {
    if (splits_[i] == label) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> AssetDataset::well_indices_with(
    const std::string& well_id, SplitLabel label) const {
  std::vector<std::size_t> out;
  auto it = wells_.find(well_id);
  if (it == wells_.end()) return out;
  for (std::size_t i : it->second) {
    if (splits_[i] == label) out.push_back(i);
  }
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {
AffineTransform fit_transform(const std::vector<double>& v) {
  AffineTransform t;
  t.shift = percentile(v, 1.0);
  t.scale = std::max(percentile(v, 99.0) - t.shift, 1e-6);
  return t;
}
}  // namespace

Scaler fit_scaler(const AssetDataset& data,
                  const std::vector<std::size_t>& development) {
  if (development.empty()) throw EmptyDevelopmentSet();
  std::vector<double> u, p1, p2, T, Q;
  for (std::size_t i : development) {
    const auto& o = data.obs(i);
    u.push_back(o.u);
    p1.push_back(o.p1);
    p2.push_back(o.p2);
    T.push_back(o.T);
    Q.push_back(o.total_rate());
  }
  Scaler s;
  s.u = fit_transform(u);
  s.p1 = fit_transform(p1);
  s.p2 = fit_transform(p2);
  s.T = fit_transform(T);
  s.Q = fit_transform(Q);
  return s;
}

}  // namespace vfm
