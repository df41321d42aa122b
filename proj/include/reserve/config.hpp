#pragma once

// Experiment configuration. Every calibrated constant has a default and can
// be overridden from a flat JSON object; unknown keys are rejected.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "reserve/controller.hpp"
#include "reserve/dynamics.hpp"
#include "reserve/hawkes.hpp"
#include "reserve/pmp.hpp"
#include "reserve/scenarios.hpp"

namespace reserve {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OmegaMaxReference { current, initial };

struct ExperimentConfig {
  std::vector<ScenarioId> scenarios{ScenarioId::single_shock, ScenarioId::prolonged_clustering,
                                    ScenarioId::false_alarm};
  std::vector<PolicyKind> policies{PolicyKind::optimal_window, PolicyKind::max_yield,
                                   PolicyKind::max_liquidity};
  int replicas = 100;
  std::uint64_t master_seed = 20240917;
  std::string output_dir = "out";

  double window_hours = 8.0;
  double horizon_days = 92.0;
  double substep_hours = 0.1;

  double lambda0_r = 100.0;
  double lambda0_m = 80.0;
  double kappa_r = 0.8;
  double kappa_m = 0.6;
  double theta_r = 2.0;
  double theta_m = 1.5;
  double mark_mean_r = 2.5e5;
  double mark_mean_m = 3.0e5;
  double zeta = 100.0;
  double eta = 10.0;
  double gamma = 5.0;

  double s_out0 = 1e10;
  double r_liq0 = 1e9;
  double r_bill0 = 9e9;

  // Rates are quoted per window and converted with window_hours.
  double r_cash_per_window = 0.0;
  double r_bill_per_window = 4.93e-5;
  double rho_per_window = 7.31e-5;

  double c_peg = 1.5e8;
  double c_fee = 6e8;
  double lambda_omega = 1e-4;
  double rho_omega = 1e-15;

  double omega_max_fraction = 0.1;  // of supply per window
  OmegaMaxReference omega_max_reference = OmegaMaxReference::initial;
  double delta_max = 0.0;

  int mpc_horizon_windows = 9;
  double sweep_tol = 1e-6;
  int sweep_max_iter = 50;
  double sweep_damping = 0.5;
  int divergence_run = 5;
  double smoothing_fraction = 1e-4;
  ShortfallDemand shortfall_demand = ShortfallDemand::gross;

  double band_height = 64.0;
  double explosion_limit = 1e6;

  HawkesParams base_r() const { return {lambda0_r, kappa_r, theta_r, mark_mean_r}; }
  HawkesParams base_m() const { return {lambda0_m, kappa_m, theta_m, mark_mean_m}; }
  RateEnvironment rates() const {
    return {r_cash_per_window / window_hours, r_bill_per_window / window_hours,
            rho_per_window / window_hours};
  }
  CostTerms costs() const { return {c_peg, c_fee, lambda_omega, rho_omega}; }
  PegParams peg() const { return {eta, gamma}; }
  int windows() const;
  int substeps_per_window() const;
};

// Throws ConfigError listing the first violated condition.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace reserve
