#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfm/dataset.hpp"

namespace vfm {

struct NegativePressureDrop : std::runtime_error {
  NegativePressureDrop() : std::runtime_error("negative pressure drop") {}
};
struct NonPositiveDensity : std::runtime_error {
  NonPositiveDensity() : std::runtime_error("non-positive density") {}
};
struct InvalidComposition : std::runtime_error {
  InvalidComposition() : std::runtime_error("invalid composition") {}
};
struct ScenarioInfeasible : std::runtime_error {
  explicit ScenarioInfeasible(const std::string& what)
      : std::runtime_error("scenario infeasible: " + what) {}
};

struct FluidSpec {
  double rho_o = 800.0;        // kg/m3
  double rho_w = 1025.0;       // kg/m3
  double gas_molar_mass = 0.019;  // kg/mol
  // standard condition reference
  static constexpr double p_std_bar = 1.01325;
  static constexpr double T_std_c = 15.0;
};

// Equal-percentage valve characteristic with a linear blend to zero below
// u = 0.05; strictly monotone non-decreasing, cv(1) = cv_max.
struct ValveSpec {
  double cv_max = 1e-3;     // effective A*C at full opening, m2
  double rangeability = 50; // R > 1
  double effective_area(double u) const;
};

struct WellScenario {
  FluidSpec fluid;
  ValveSpec valve;
  double p_res0 = 180.0;        // initial reservoir pressure, bar
  double decline_bar_per_day = 0.05;
  double p2_bar = 20.0;         // downstream pressure setpoint
  double temp_c = 70.0;         // line temperature upstream the choke
  double phi_g0 = 0.2;          // gas fraction (thousand-Sm3 liquid equiv.)
  double water_cut0 = 0.2;      // initial water cut of the liquid
  double water_cut_drift = 2e-4;  // per day, clamped to [0, 0.95]
  double inflow_loss_bar_per_rate = 0.05;  // p1 = p_res - k*Q
  double rate_target = 400.0;   // Sm3/d total (liquid equivalents)
  double cadence_days = 2.0;
  double horizon_days = 600.0;
  double sigma_sep = 0.01;      // relative observation noise, separator
  double sigma_mpfm = 0.05;     // relative observation noise, MPFM
  double mpfm_fraction = 0.8;   // share of MPFM-sourced points
  double controller_gain = 0.25;
  std::uint64_t seed = 0;
  std::string well_id = "W00";
  std::string asset_id = "A0";
};

// Single phase choke equation: Q = (A*C) * sqrt((p1 - p2) / rho), pressures
// in bar converted to Pa internally, Q returned in m3/s.
double choke_flow(double area_times_c, double p1_bar, double p2_bar,
                  double rho);

// Homogeneous no-slip mixture density at line conditions. phi holds
// standard-condition volumetric fractions with gas in thousand-Sm3
// liquid equivalents (actual standard gas volume is 1000x the equivalent).
double mixture_density(double phi_g, double phi_o, double phi_w,
                       const FluidSpec& fluid, double p_bar, double T_c);

// Steady-state model of one day's operating point: solves the coupled
// inflow/choke balance for the true rate at the given opening.
double steady_rate(const WellScenario& sc, double u, double p_res,
                   double phi_g, double phi_o, double phi_w);

std::vector<WellObservation> simulate_well(const WellScenario& scenario);

using ScenarioSampler =
    std::function<WellScenario(std::size_t well_index, std::uint64_t seed)>;

AssetDataset generate_asset(std::size_t n_wells, const ScenarioSampler& sampler,
                            std::uint64_t seed);

// The default two-asset benchmark sampler: declining reservoirs, one asset
// at a distinctly higher pressure regime, heterogeneous valves and fluids.
ScenarioSampler default_benchmark_sampler(std::size_t n_assets = 2);

}  // namespace vfm
