#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfm/dataset.hpp"

namespace vfm {

struct NonPositiveTruth : std::runtime_error {
  NonPositiveTruth() : std::runtime_error("percentage error requires Q > 0") {}
};
struct EmptyErrors : std::runtime_error {
  EmptyErrors() : std::runtime_error("empty error list") {}
};

// Signed percentage error 100 (Qhat - Q) / Q, physical units.
double percentage_error(double predicted, double truth);

// Trimmed mean of |e|: sort, drop the ceil(0.05 N) largest, mean the rest.
// At least one value always remains (a single error is its own mean).
double trimmed_mape(const std::vector<double>& errors, double trim = 0.05);

// Root mean square of percentage errors with the same trimming rule.
double trimmed_rmse(const std::vector<double>& errors, double trim = 0.05);

struct PercentileSummary {
  double mean = 0, p05 = 0, p25 = 0, p50 = 0, p75 = 0, p95 = 0;
};
PercentileSummary summarize(const std::vector<double>& values);

// Binary physical-consistency score for one point: 0 when a +delta_p1
// perturbation strictly increases the prediction, 1 otherwise.
// `predict` maps a WellObservation to a flow prediction in physical units.
using PointPredictor = std::function<double(const WellObservation&)>;

std::vector<int> sensitivity_points(const PointPredictor& predict,
                                    const std::vector<WellObservation>& points,
                                    double delta_p1_bar = 10.0);
double sensitivity_score(const PointPredictor& predict,
                         const std::vector<WellObservation>& points,
                         double delta_p1_bar = 10.0);

}  // namespace vfm
