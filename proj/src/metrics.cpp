#include "vfm/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace vfm {

double percentage_error(double predicted, double truth) {
  if (!(truth > 0)) throw NonPositiveTruth();
  return 100.0 * (predicted - truth) / truth;
}

namespace {
// |errors| sorted ascending with the ceil(trim*N) largest removed, keeping
// at least one value.
std::vector<double> trimmed_abs(const std::vector<double>& errors, double trim) {
  if (errors.empty()) throw EmptyErrors();
  std::vector<double> abs_e(errors.size());
  std::transform(errors.begin(), errors.end(), abs_e.begin(),
                 [](double e) { return std::abs(e); });
  std::sort(abs_e.begin(), abs_e.end());
  auto drop = static_cast<std::size_t>(
      std::ceil(trim * static_cast<double>(abs_e.size())));
  drop = std::min(drop, abs_e.size() - 1);
  abs_e.resize(abs_e.size() - drop);
  return abs_e;
}
}  // namespace

double trimmed_mape(const std::vector<double>& errors, double trim) {
  const auto kept = trimmed_abs(errors, trim);
  double sum = 0;
  for (double e : kept) sum += e;
  return sum / static_cast<double>(kept.size());
}

double trimmed_rmse(const std::vector<double>& errors, double trim) {
  const auto kept = trimmed_abs(errors, trim);
  double sum = 0;
  for (double e : kept) sum += e * e;
  return std::sqrt(sum / static_cast<double>(kept.size()));
}

PercentileSummary summarize(const std::vector<double>& values) {
  if (values.empty()) throw EmptyErrors();
  PercentileSummary s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.p05 = percentile(values, 5);
  s.p25 = percentile(values, 25);
  s.p50 = percentile(values, 50);
  s.p75 = percentile(values, 75);
  s.p95 = percentile(values, 95);
  return s;
}

std::vector<int> sensitivity_points(const PointPredictor& predict,
                                    const std::vector<WellObservation>& points,
                                    double delta_p1_bar) {
  std::vector<int> out;
  out.reserve(points.size());
  for (const auto& o : points) {
    WellObservation perturbed = o;
    perturbed.p1 += delta_p1_bar;
    const double base = predict(o);
    const double plus = predict(perturbed);
    // Strict increase scores 0; a flat response counts as a failure.
    out.push_back(plus - base > 0 ? 0 : 1);
  }
  return out;
}

double sensitivity_score(const PointPredictor& predict,
                         const std::vector<WellObservation>& points,
                         double delta_p1_bar) {
  if (points.empty()) throw EmptyErrors();
  const auto s = sensitivity_points(predict, points, delta_p1_bar);
  double sum = 0;
  for (int v : s) sum += v;
  return sum / static_cast<double>(s.size());
}

}  // namespace vfm
