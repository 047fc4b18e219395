#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "vfm/metrics.hpp"
#include "vfm/rng.hpp"

using namespace vfm;

TEST_CASE("percentage error is signed and in percent") {
  CHECK(percentage_error(110.0, 100.0) == doctest::Approx(10.0));
  CHECK(percentage_error(90.0, 100.0) == doctest::Approx(-10.0));
  CHECK(percentage_error(100.0, 100.0) == 0.0);
  CHECK_THROWS_AS(percentage_error(50.0, 0.0), NonPositiveTruth);
  CHECK_THROWS_AS(percentage_error(50.0, -1.0), NonPositiveTruth);
}

TEST_CASE("trimmed metrics drop the ceil(5%) largest magnitudes") {
  // twenty errors 1..20: one value is dropped, the largest
  std::vector<double> e;
  for (int i = 1; i <= 20; ++i) e.push_back(i);
  CHECK(trimmed_mape(e) == doctest::Approx(10.0));  // mean of 1..19
  CHECK(trimmed_rmse(e) == doctest::Approx(std::sqrt(2470.0 / 19.0)));

  // signs are irrelevant: the trim works on magnitudes
  std::vector<double> signs = {-3.0, 1.0};
  CHECK(trimmed_mape(signs) == doctest::Approx(1.0));  // ceil(0.1)=1 dropped
  CHECK(trimmed_rmse(signs) == doctest::Approx(1.0));

  // 21 errors: ceil(1.05) = 2 dropped
  e.push_back(100.0);
  double sum = 0;
  for (int i = 1; i <= 19; ++i) sum += i;
  CHECK(trimmed_mape(e) == doctest::Approx(sum / 19.0));

  // a single error survives the trim and is its own mean
  CHECK(trimmed_mape({42.0}) == 42.0);
  CHECK(trimmed_rmse({-42.0}) == 42.0);
  CHECK_THROWS_AS(trimmed_mape({}), EmptyErrors);
}

TEST_CASE("trimmed metrics match brute force on 1000 random vectors") {
  auto rng = make_rng(20250101);
  std::uniform_int_distribution<int> n_dist(1, 60);
  std::normal_distribution<double> err(0.0, 15.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = n_dist(rng);
    std::vector<double> e;
    for (int i = 0; i < n; ++i) e.push_back(err(rng));

    std::vector<double> abs_sorted(e.size());
    std::transform(e.begin(), e.end(), abs_sorted.begin(),
                   [](double v) { return std::abs(v); });
    std::sort(abs_sorted.begin(), abs_sorted.end());
    std::size_t drop = static_cast<std::size_t>(std::ceil(0.05 * n));
    drop = std::min(drop, abs_sorted.size() - 1);
    abs_sorted.resize(abs_sorted.size() - drop);

    double mean = 0, sq = 0;
    for (double v : abs_sorted) {
      mean += v;
      sq += v * v;
    }
    mean /= static_cast<double>(abs_sorted.size());
    sq = std::sqrt(sq / static_cast<double>(abs_sorted.size()));

    CHECK(std::abs(trimmed_mape(e) - mean) < 1e-9);
    CHECK(std::abs(trimmed_rmse(e) - sq) < 1e-9);
  }
}

TEST_CASE("percentile summary matches direct percentiles") {
  std::vector<double> v;
  for (int i = 0; i <= 100; ++i) v.push_back(i);
  const PercentileSummary s = summarize(v);
  CHECK(s.mean == doctest::Approx(50.0));
  CHECK(s.p05 == doctest::Approx(5.0));
  CHECK(s.p25 == doctest::Approx(25.0));
  CHECK(s.p50 == doctest::Approx(50.0));
  CHECK(s.p75 == doctest::Approx(75.0));
  CHECK(s.p95 == doctest::Approx(95.0));
  CHECK_THROWS_AS(summarize({}), EmptyErrors);
}

TEST_CASE("sensitivity scores strict monotone response as zero") {
  std::vector<WellObservation> points;
  for (int i = 0; i < 10; ++i) {
    WellObservation o = testutil::make_obs("W00", "A0", i);
    o.p1 = 100.0 + 10.0 * i;
    points.push_back(o);
  }

  // mechanistic predictor: flow grows with the root of the pressure drop,
  // so a +10 bar upstream perturbation must increase it at every point
  PointPredictor mech = [](const WellObservation& o) {
    return 5.0 * std::sqrt(o.p1 - o.p2);
  };
  CHECK(sensitivity_score(mech, points) == 0.0);

  // inverted and flat predictors fail everywhere
  PointPredictor inverted = [](const WellObservation& o) { return -o.p1; };
  CHECK(sensitivity_score(inverted, points) == 1.0);
  PointPredictor flat = [](const WellObservation&) { return 123.0; };
  CHECK(sensitivity_score(flat, points) == 1.0);

  // mixed behaviour averages the per-point scores
  PointPredictor mixed = [](const WellObservation& o) {
    return o.p1 < 150.0 ? o.p1 : 1000.0 - o.p1;
  };
  const auto scores = sensitivity_points(mixed, points);
  REQUIRE(scores.size() == points.size());
  double manual = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double base = mixed(points[i]);
    WellObservation up = points[i];
    up.p1 += 10.0;
    manual += mixed(up) - base > 0 ? 0 : 1;
    CHECK(scores[i] == (mixed(up) - base > 0 ? 0 : 1));
  }
  CHECK(sensitivity_score(mixed, points) ==
        doctest::Approx(manual / static_cast<double>(points.size())));

  CHECK_THROWS_AS(sensitivity_score(mech, {}), EmptyErrors);

  // the perturbation size is configurable
  PointPredictor step = [](const WellObservation& o) {
    return o.p1 > 195.0 ? 2.0 : 1.0;
  };
  WellObservation at190 = testutil::make_obs();
  at190.p1 = 190.0;
  CHECK(sensitivity_score(step, {at190}, 10.0) == 0.0);  // 200 > 195: rises
  CHECK(sensitivity_score(step, {at190}, 1.0) == 1.0);   // 191: flat
}
