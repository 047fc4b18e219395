#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vfm/rng.hpp"
#include "vfm/synth.hpp"

using namespace vfm;

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

}  // namespace

TEST_CASE("choke equation reproduces hand values") {
  // 1 bar drop at rho = 1000 kg/m3: v = sqrt(1e5 / 1000) = 10 m/s
  CHECK(choke_flow(2.0, 21.0, 20.0, 1000.0) == doctest::Approx(20.0));
  CHECK(choke_flow(0.5, 20.0, 20.0, 800.0) == 0.0);
  CHECK_THROWS_AS(choke_flow(1.0, 19.0, 20.0, 1000.0), NegativePressureDrop);
  CHECK_THROWS_AS(choke_flow(1.0, 21.0, 20.0, 0.0), NonPositiveDensity);
  CHECK_THROWS_AS(choke_flow(1.0, 21.0, 20.0, -5.0), NonPositiveDensity);
}

TEST_CASE("mixture density matches closed-form cases") {
  FluidSpec fluid;
  fluid.rho_o = 800.0;
  fluid.rho_w = 1000.0;

  // pure oil: density is the oil density at any line condition
  CHECK(mixture_density(0, 1, 0, fluid, 150.0, 80.0) ==
        doctest::Approx(800.0).epsilon(1e-12));

  // equal oil and water cuts: simple volumetric average of the liquids
  CHECK(mixture_density(0, 0.5, 0.5, fluid, 60.0, 50.0) ==
        doctest::Approx(900.0).epsilon(1e-12));

  // pure gas reduces to the ideal gas law at line conditions
  const double p_bar = 120.0, T_c = 90.0;
  const double expected = p_bar * 1e5 * fluid.gas_molar_mass /
                          (8.314462618 * (T_c + 273.15));
  CHECK(mixture_density(1, 0, 0, fluid, p_bar, T_c) ==
        doctest::Approx(expected).epsilon(1e-9));

  // gas lightens the mixture; higher pressure compresses it back up
  const double mixed = mixture_density(0.3, 0.5, 0.2, fluid, 100.0, 70.0);
  CHECK(mixed < mixture_density(0.0, 0.75, 0.25, fluid, 100.0, 70.0));
  CHECK(mixed < mixture_density(0.3, 0.5, 0.2, fluid, 200.0, 70.0));

  CHECK_THROWS_AS(mixture_density(0.5, 0.5, 0.5, fluid, 100.0, 70.0),
                  InvalidComposition);
  CHECK_THROWS_AS(mixture_density(-0.1, 0.6, 0.5, fluid, 100.0, 70.0),
                  InvalidComposition);
  CHECK_THROWS_AS(mixture_density(0.3, 0.5, 0.2, fluid, 0.0, 70.0),
                  InvalidComposition);
}

TEST_CASE("valve characteristic is monotone with a linear low-end blend") {
  ValveSpec valve;
  valve.cv_max = 2e-4;
  valve.rangeability = 40.0;

  CHECK(valve.effective_area(0.0) == 0.0);
  CHECK(valve.effective_area(1.0) == doctest::Approx(valve.cv_max));
  // continuity where the blend meets the equal-percentage curve
  CHECK(valve.effective_area(0.05 - 1e-9) ==
        doctest::Approx(valve.effective_area(0.05)).epsilon(1e-6));
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double a = valve.effective_area(i / 100.0);
    CHECK(a >= prev);
    prev = a;
  }
}

TEST_CASE("steady rate satisfies the coupled inflow/choke balance") {
  WellScenario sc;
  const double phi_g = 0.2, phi_o = 0.6, phi_w = 0.2;
  const double Q = steady_rate(sc, 0.6, sc.p_res0, phi_g, phi_o, phi_w);
  REQUIRE(Q > 0);

  const double p1 = sc.p_res0 - sc.inflow_loss_bar_per_rate * Q;
  const double rho = mixture_density(phi_g, phi_o, phi_w, sc.fluid, p1, sc.temp_c);
  // line volume moved per day per unit of standard liquid-equivalent rate
  const double gas_expansion = (FluidSpec::p_std_bar / p1) *
                               ((sc.temp_c + 273.15) / (FluidSpec::T_std_c + 273.15));
  const double line_m3_per_day = Q * (phi_g * 1000.0 * gas_expansion + phi_o + phi_w);
  const double v = line_m3_per_day / 86400.0 / sc.valve.effective_area(0.6);
  CHECK(v == doctest::Approx(std::sqrt((p1 - sc.p2_bar) * 1e5 / rho)).epsilon(1e-8));

  // monotone in opening and in reservoir pressure
  CHECK(steady_rate(sc, 0.8, sc.p_res0, phi_g, phi_o, phi_w) > Q);
  CHECK(steady_rate(sc, 0.6, sc.p_res0 + 30, phi_g, phi_o, phi_w) > Q);
  CHECK(steady_rate(sc, 0.0, sc.p_res0, phi_g, phi_o, phi_w) == 0.0);
  CHECK(steady_rate(sc, 0.6, sc.p2_bar, phi_g, phi_o, phi_w) == 0.0);
}

TEST_CASE("simulated wells honour every observation invariant") {
  WellScenario sc;
  sc.seed = 5;
  sc.rate_target = 300.0;
  const auto obs = simulate_well(sc);
  REQUIRE(obs.size() > 100);

  double prev_t = -1;
  for (const auto& o : obs) {
    CHECK_NOTHROW(validate_observation(o));
    CHECK(o.t > prev_t);
    prev_t = o.t;
    CHECK(o.well_id == sc.well_id);
    CHECK(o.p2 == sc.p2_bar);
  }

  // the controller opens the choke as the reservoir declines, producing the
  // negative choke/upstream-pressure correlation the models must disentangle
  std::vector<double> u, p1;
  for (const auto& o : obs) {
    u.push_back(o.u);
    p1.push_back(o.p1);
  }
  CHECK(pearson(u, p1) < -0.5);
}

TEST_CASE("observation noise has the configured relative spread") {
  // constant conditions: no decline, no drift, frozen controller, so the
  // true rate is the same every day and the spread is pure observation noise
  WellScenario sc;
  sc.decline_bar_per_day = 0.0;
  sc.water_cut_drift = 0.0;
  sc.controller_gain = 0.0;
  sc.mpfm_fraction = 1.0;  // all points at sigma_mpfm = 0.05
  sc.cadence_days = 1.0;
  sc.horizon_days = 3000.0;
  sc.rate_target = 300.0;
  sc.seed = 31;
  const auto obs = simulate_well(sc);
  REQUIRE(obs.size() > 2500);

  std::vector<double> q;
  for (const auto& o : obs) q.push_back(o.total_rate());
  const double mean = std::accumulate(q.begin(), q.end(), 0.0) /
                      static_cast<double>(q.size());
  double var = 0;
  for (double v : q) var += (v - mean) * (v - mean);
  var /= static_cast<double>(q.size() - 1);
  const double rel_std = std::sqrt(var) / mean;
  CHECK(rel_std > 0.04);
  CHECK(rel_std < 0.06);

  // separator points carry an order of magnitude less noise
  sc.mpfm_fraction = 0.0;
  sc.seed = 32;
  const auto sep = simulate_well(sc);
  std::vector<double> qs;
  for (const auto& o : sep) {
    CHECK(o.source == Source::Separator);
    CHECK(o.weight == 1.0);
    qs.push_back(o.total_rate());
  }
  const double mean_s = std::accumulate(qs.begin(), qs.end(), 0.0) /
                        static_cast<double>(qs.size());
  double var_s = 0;
  for (double v : qs) var_s += (v - mean_s) * (v - mean_s);
  var_s /= static_cast<double>(qs.size() - 1);
  CHECK(std::sqrt(var_s) / mean_s == doctest::Approx(0.01).epsilon(0.25));
}

TEST_CASE("infeasible scenarios are rejected up front") {
  WellScenario sc;
  sc.rate_target = 1e9;
  CHECK_THROWS_AS(simulate_well(sc), ScenarioInfeasible);
  sc.rate_target = 300.0;
  sc.horizon_days = 0.0;
  CHECK_THROWS_AS(simulate_well(sc), ScenarioInfeasible);
  sc.horizon_days = 600.0;
  sc.cadence_days = -1.0;
  CHECK_THROWS_AS(simulate_well(sc), ScenarioInfeasible);
}

TEST_CASE("asset generation is deterministic and well-structured") {
  const auto sampler = default_benchmark_sampler(2);
  AssetDataset a = generate_asset(6, sampler, 77);
  AssetDataset b = generate_asset(6, sampler, 77);

  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() > 500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.obs(i).t == b.obs(i).t);
    CHECK(a.obs(i).u == b.obs(i).u);
    CHECK(a.obs(i).q_o == b.obs(i).q_o);
  }

  CHECK(a.well_ids() == std::vector<std::string>{"W00", "W01", "W02", "W03",
                                                 "W04", "W05"});
  CHECK(a.asset_ids() == std::vector<std::string>{"A0", "A1"});
  CHECK(a.wells_of_asset("A0") == std::vector<std::string>{"W00", "W02", "W04"});

  // a different seed changes the data
  AssetDataset c = generate_asset(6, sampler, 78);
  bool differs = c.size() != a.size();
  for (std::size_t i = 0; !differs && i < std::min(a.size(), c.size()); ++i) {
    differs = a.obs(i).q_o != c.obs(i).q_o;
  }
  CHECK(differs);

  // roughly the configured share of MPFM points
  std::size_t mpfm = 0;
  for (const auto& o : a.observations()) mpfm += o.source == Source::Mpfm;
  const double frac = static_cast<double>(mpfm) / static_cast<double>(a.size());
  CHECK(frac > 0.7);
  CHECK(frac < 0.9);

  // the two assets sit in visibly different pressure regimes
  double sum0 = 0, sum1 = 0;
  std::size_t n0 = 0, n1 = 0;
  for (const auto& o : a.observations()) {
    if (o.asset_id == "A0") {
      sum0 += o.p1;
      ++n0;
    } else {
      sum1 += o.p1;
      ++n1;
    }
  }
  REQUIRE(n0 > 0);
  REQUIRE(n1 > 0);
  CHECK(sum1 / static_cast<double>(n1) >
        sum0 / static_cast<double>(n0) + 50.0);
}
