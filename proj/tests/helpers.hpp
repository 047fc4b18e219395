#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vfm/dataset.hpp"

namespace vfm::testutil {

// A self-consistent observation: phase rates derived from a total rate and a
// fixed composition, weight derived from the source.
inline WellObservation make_obs(const std::string& well = "W00",
                                const std::string& asset = "A0", double t = 0,
                                double u = 0.5, double Q = 100.0,
                                Source source = Source::Separator) {
  WellObservation o;
  o.well_id = well;
  o.asset_id = asset;
  o.t = t;
  o.u = u;
  o.p1 = 150.0;
  o.p2 = 20.0;
  o.T = 70.0;
  o.phi_g = 0.25;
  o.phi_o = 0.5;
  o.phi_w = 0.25;
  o.q_g = Q * o.phi_g;
  o.q_o = Q * o.phi_o;
  o.q_w = Q * o.phi_w;
  o.source = source;
  o.weight = source_weight(source);
  return o;
}

// A small deterministic multi-well dataset with a smooth rate law, dense
// enough for the splitter to produce all three labels per well.
inline AssetDataset make_training_dataset(int n_wells = 2, int n_per_well = 60,
                                          double cadence = 2.0) {
  std::vector<WellObservation> obs;
  for (int w = 0; w < n_wells; ++w) {
    const std::string well = "W0" + std::to_string(w);
    const std::string asset = w < (n_wells + 1) / 2 ? "A0" : "A1";
    for (int i = 0; i < n_per_well; ++i) {
      const double t = cadence * i;
      const double u = 0.3 + 0.4 * (0.5 + 0.5 * std::sin(0.13 * i + w));
      const double p1 = 180.0 - 0.05 * t + 5.0 * std::cos(0.21 * i);
      const double Q = 40.0 * u * std::sqrt(p1 - 20.0) + 25.0;
      WellObservation o = make_obs(well, asset, t, u, Q,
                                   i % 5 == 0 ? Source::Separator : Source::Mpfm);
      o.p1 = p1;
      obs.push_back(o);
    }
  }
  return AssetDataset(std::move(obs));
}

}  // namespace vfm::testutil
