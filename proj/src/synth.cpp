#include "vfm/synth.hpp"

#include <algorithm>
#include <cmath>

#include "vfm/rng.hpp"

namespace vfm {

namespace {
constexpr double kGasConstant = 8.314462618;  // J/(mol K)
constexpr double kBarToPa = 1e5;
constexpr double kSecondsPerDay = 86400.0;
constexpr double kGasVolumeFactor = 1000.0;  // liquid equivalents -> Sm3

double kelvin(double T_c) { return T_c + 273.15; }
}  // namespace

double ValveSpec::effective_area(double u) const {
  const double cv0 = cv_max * std::pow(rangeability, -1.0);
  const double blend_u = 0.05;
  auto eqpct = [&](double x) { return cv_max * std::pow(rangeability, x - 1.0); };
  if (u <= 0) return 0.0;
  if (u < blend_u) return u / blend_u * eqpct(blend_u);
  (void)cv0;
  return eqpct(std::min(u, 1.0));
}

double choke_flow(double area_times_c, double p1_bar, double p2_bar,
                  double rho) {
  if (rho <= 0) throw NonPositiveDensity();
  if (p1_bar < p2_bar) throw NegativePressureDrop();
  const double dp = (p1_bar - p2_bar) * kBarToPa;
  return area_times_c * std::sqrt(dp / rho);
}

double mixture_density(double phi_g, double phi_o, double phi_w,
                       const FluidSpec& fluid, double p_bar, double T_c) {
  const double sum = phi_g + phi_o + phi_w;
  if (std::abs(sum - 1.0) > 1e-9 || phi_g < 0 || phi_o < 0 || phi_w < 0 ||
      p_bar <= 0 || T_c <= -273.15) {
    throw InvalidComposition();
  }
  const double rho_g_std = FluidSpec::p_std_bar * kBarToPa *
                           fluid.gas_molar_mass /
                           (kGasConstant * kelvin(FluidSpec::T_std_c));
  // Standard volumes on a one-unit total basis; gas fraction is given in
  // thousand-Sm3 liquid equivalents.
  const double v_g_std = phi_g * kGasVolumeFactor;
  const double mass = v_g_std * rho_g_std + phi_o * fluid.rho_o +
                      phi_w * fluid.rho_w;
  const double v_g_line = v_g_std * (FluidSpec::p_std_bar / p_bar) *
                          (kelvin(T_c) / kelvin(FluidSpec::T_std_c));
  return mass / (v_g_line + phi_o + phi_w);
}

// Line-volume per unit standard liquid-equivalent rate.
static double line_volume_factor(double phi_g, double phi_o, double phi_w,
                                 double p_bar, double T_c) {
  const double gas_expansion = (FluidSpec::p_std_bar / p_bar) *
                               (kelvin(T_c) / kelvin(FluidSpec::T_std_c));
  return phi_g * kGasVolumeFactor * gas_expansion + phi_o + phi_w;
}

double steady_rate(const WellScenario& sc, double u, double p_res,
                   double phi_g, double phi_o, double phi_w) {
  const double area = sc.valve.effective_area(u);
  if (area <= 0 || p_res <= sc.p2_bar) return 0.0;
  const double k = sc.inflow_loss_bar_per_rate;
  double p1 = p_res;
  double Q = 0;
  // Density and gas expansion depend on p1, which depends on Q; a few
  // fixed-point rounds suffice at these conditions.
  for (int it = 0; it < 25; ++it) {
    const double rho = mixture_density(phi_g, phi_o, phi_w, sc.fluid, p1, sc.temp_c);
    const double c = line_volume_factor(phi_g, phi_o, phi_w, p1, sc.temp_c);
    // (a Q)^2 rho = (p_res - k Q - p2) * 1e5, a = c / (86400 * area)
    const double a = c / (kSecondsPerDay * area);
    const double A2 = a * a * rho;
    const double B = kBarToPa * k;
    const double C = -kBarToPa * (p_res - sc.p2_bar);
    Q = (-B + std::sqrt(B * B - 4 * A2 * C)) / (2 * A2);
    const double p1_new = p_res - k * Q;
    if (p1_new <= sc.p2_bar) return 0.0;
    if (std::abs(p1_new - p1) < 1e-10 * std::max(1.0, p1)) {
      p1 = p1_new;
      break;
    }
    p1 = p1_new;
  }
  return Q;
}

namespace {

struct Composition {
  double g, o, w;
};

Composition composition_at(const WellScenario& sc, double t) {
  const double wc = std::clamp(sc.water_cut0 + sc.water_cut_drift * t, 0.0, 0.95);
  const double g = sc.phi_g0;
  const double o = (1.0 - g) * (1.0 - wc);
  return {g, o, 1.0 - g - o};
}

// Solve for the opening that meets the target on day 0.
double initial_opening(const WellScenario& sc, const Composition& phi) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double q = steady_rate(sc, mid, sc.p_res0, phi.g, phi.o, phi.w);
    (q < sc.rate_target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<WellObservation> simulate_well(const WellScenario& sc) {
  if (sc.horizon_days <= 0 || sc.cadence_days <= 0) {
    throw ScenarioInfeasible("non-positive horizon or cadence");
  }
  const auto phi0 = composition_at(sc, 0.0);
  const double capacity = steady_rate(sc, 1.0, sc.p_res0, phi0.g, phi0.o, phi0.w);
  if (capacity < sc.rate_target) {
    throw ScenarioInfeasible("rate target " + std::to_string(sc.rate_target) +
                             " exceeds day-0 capacity " + std::to_string(capacity));
  }

  auto rng = make_rng(sc.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<WellObservation> out;
  double u = initial_opening(sc, phi0);
  for (double t = 0; t <= sc.horizon_days; t += sc.cadence_days) {
    const double p_res = sc.p_res0 - sc.decline_bar_per_day * t;
    const auto phi = composition_at(sc, t);
    if (p_res <= sc.p2_bar) break;
    const double Q = steady_rate(sc, u, p_res, phi.g, phi.o, phi.w);
    if (Q <= 0) break;
    const double p1 = p_res - sc.inflow_loss_bar_per_rate * Q;

    WellObservation o;
    o.well_id = sc.well_id;
    o.asset_id = sc.asset_id;
    o.t = t;
    o.u = u;
    o.p1 = p1;
    o.p2 = sc.p2_bar;
    o.T = sc.temp_c;
    o.phi_g = phi.g;
    o.phi_o = phi.o;
    o.phi_w = phi.w;
    const bool mpfm = unif(rng) < sc.mpfm_fraction;
    o.source = mpfm ? Source::Mpfm : Source::Separator;
    o.weight = source_weight(o.source);
    const double sigma = mpfm ? sc.sigma_mpfm : sc.sigma_sep;
    const double factor = std::max(0.1, 1.0 + sigma * gauss(rng));
    const double Q_obs = Q * factor;
    o.q_g = Q_obs * phi.g;
    o.q_o = Q_obs * phi.o;
    o.q_w = Q_obs * phi.w;
    validate_observation(o);
    out.push_back(std::move(o));

    // Proportional choke control toward the rate target, saturating at 1.
    u = std::clamp(u + sc.controller_gain * (sc.rate_target - Q) / sc.rate_target,
                   0.0, 1.0);
  }
  return out;
}

AssetDataset generate_asset(std::size_t n_wells, const ScenarioSampler& sampler,
                            std::uint64_t seed) {
  if (n_wells < 1) throw std::invalid_argument("n_wells must be >= 1");
  std::vector<WellObservation> all;
  for (std::size_t w = 0; w < n_wells; ++w) {
    WellScenario sc = sampler(w, derive_seed(seed, w));
    auto obs = simulate_well(sc);
    all.insert(all.end(), obs.begin(), obs.end());
  }
  return AssetDataset(std::move(all));
}

ScenarioSampler default_benchmark_sampler(std::size_t n_assets) {
  return [n_assets](std::size_t w, std::uint64_t seed) {
    auto rng = make_rng(seed, 17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t asset = (n_assets <= 1) ? 0 : w % n_assets;

    WellScenario sc;
    sc.seed = seed;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "W%02zu", w);
    sc.well_id = buf;
    std::snprintf(buf, sizeof(buf), "A%zu", asset);
    sc.asset_id = buf;

    // Asset 1 operates at a distinctly higher pressure regime.
    if (asset == 1) {
      sc.p_res0 = 320.0 + 60.0 * unif(rng);
      sc.p2_bar = 40.0 + 20.0 * unif(rng);
    } else {
      sc.p_res0 = 150.0 + 50.0 * unif(rng);
      sc.p2_bar = 15.0 + 10.0 * unif(rng);
    }
    sc.decline_bar_per_day = 0.03 + 0.05 * unif(rng);
    sc.temp_c = 60.0 + 30.0 * unif(rng);
    sc.fluid.rho_o = 750.0 + 130.0 * unif(rng);
    sc.fluid.rho_w = 1000.0 + 50.0 * unif(rng);
    sc.fluid.gas_molar_mass = 0.017 + 0.005 * unif(rng);
    sc.valve.cv_max = (3.0 + 6.0 * unif(rng)) * 1e-4;
    sc.valve.rangeability = 20.0 + 60.0 * unif(rng);
    sc.phi_g0 = 0.1 + 0.3 * unif(rng);
    sc.water_cut0 = 0.1 + 0.3 * unif(rng);
    sc.water_cut_drift = (1.0 + 3.0 * unif(rng)) * 1e-4;
    sc.cadence_days = 2.0;
    sc.horizon_days = 600.0;
    sc.mpfm_fraction = 0.8;

    const auto phi0 = composition_at(sc, 0.0);
    const double capacity =
        steady_rate(sc, 1.0, sc.p_res0, phi0.g, phi0.o, phi0.w);
    sc.rate_target = (0.3 + 0.3 * unif(rng)) * capacity;
    return sc;
  };
}

}  // namespace vfm
