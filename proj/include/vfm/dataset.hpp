#pragma once

#include <Eigen/Core>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vfm {

enum class Source { Separator, Mpfm };
enum class SplitLabel { Train, Validation, Test, Unassigned };

std::string to_string(Source s);
std::string to_string(SplitLabel s);
Source source_from_string(const std::string& s);
SplitLabel split_from_string(const std::string& s);

// One steady-state averaged data point from one well. Gas rate q_g is stored
// in thousand-Sm3/d liquid equivalents (raw Sm3/d divided by 1000 at
// ingestion).
struct WellObservation {
  std::string well_id;
  std::string asset_id;
  double t = 0;       // days since first observation of the well
  double u = 0;       // choke opening, fraction of full travel in [0,1]
  double p1 = 0;      // upstream pressure, bar
  double p2 = 0;      // downstream pressure, bar
  double T = 0;       // upstream temperature, degC
  double phi_g = 0, phi_o = 0, phi_w = 0;
  double q_g = 0, q_o = 0, q_w = 0;
  Source source = Source::Separator;
  double weight = 1.0;

  double total_rate() const { return q_g + q_o + q_w; }
};

// Sample weight rule: 0.1 for multiphase meter points, 1.0 for separator.
double source_weight(Source s);

// Validates every WellObservation invariant; throws InvariantViolation with
// a reason string on failure.
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
void validate_observation(const WellObservation& obs);

struct AffineTransform {
  double shift = 0;
  double scale = 1;  // > 0 always
  double apply(double x) const { return (x - shift) / scale; }
  double invert(double y) const { return y * scale + shift; }
};

// Per-variable affine scaling to roughly the unit interval.
struct Scaler {
  AffineTransform u, p1, p2, T, Q;
};

struct EmptyDevelopmentSet : std::runtime_error {
  EmptyDevelopmentSet() : std::runtime_error("empty development set") {}
};

// Observations grouped by well and asset. Immutable after construction;
// safe for shared read-only access from parallel trainers.
class AssetDataset {
 public:
  AssetDataset() = default;
  explicit AssetDataset(std::vector<WellObservation> observations);

  const std::vector<WellObservation>& observations() const { return obs_; }
  const WellObservation& obs(std::size_t i) const { return obs_[i]; }
  std::size_t size() const { return obs_.size(); }

  // Per-well observation indices, sorted by t. Wells iterate in
  // lexicographic well_id order.
  const std::map<std::string, std::vector<std::size_t>>& wells() const {
    return wells_;
  }
  std::vector<std::string> well_ids() const;
  std::vector<std::string> asset_ids() const;
  const std::string& asset_of(const std::string& well_id) const;
  std::vector<std::string> wells_of_asset(const std::string& asset_id) const;

  const Scaler& scaler() const { return scaler_; }
  void set_scaler(const Scaler& s) { scaler_ = s; }

  SplitLabel split(std::size_t i) const { return splits_[i]; }
  const std::vector<SplitLabel>& splits() const { return splits_; }
  void set_splits(std::vector<SplitLabel> labels);

  std::vector<std::size_t> indices_with(SplitLabel label) const;
  std::vector<std::size_t> well_indices_with(const std::string& well_id,
                                             SplitLabel label) const;

 private:
  std::vector<WellObservation> obs_;
  std::map<std::string, std::vector<std::size_t>> wells_;
  std::map<std::string, std::string> well_asset_;
  Scaler scaler_;
  std::vector<SplitLabel> splits_;
};

// Percentile with linear interpolation on the sorted sample, p in [0,100].
double percentile(std::vector<double> values, double p);

// Fits the global scaler on the given observation indices (the development
// set): shift = P01, scale = P99 - P01 floored at 1e-6, per variable.
Scaler fit_scaler(const AssetDataset& data,
                  const std::vector<std::size_t>& development);

}  // namespace vfm
