#pragma once

// Realized-path records and the revenue / depeg / responsiveness metrics.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "reserve/controller.hpp"
#include "reserve/dynamics.hpp"
#include "reserve/scenarios.hpp"

namespace reserve {

struct WindowLog {
  double t_start = 0.0;  // hours
  ReserveState state;    // at the window start
  ControlAction control; // as requested by the policy
  double omega_max = 0.0;
  double lambda_r = 0.0;  // filtered intensities at the window start
  double lambda_m = 0.0;
  double shortfall = 0.0;    // unmet redemption dollars in the window
  double bills_bought = 0.0; // realized cash -> bills dollars
  double bills_sold = 0.0;   // realized bills -> cash dollars
  StepStatus status = StepStatus::active;  // status at the window start
  int solver_iterations = 0;
  bool solver_converged = true;
};

// Stage-cost pieces of one substep, all in $/hour and all nonnegative.
struct SubstepCost {
  double carry = 0.0;    // r_bill * R_bill
  double peg = 0.0;      // c_peg * dP^2
  double fee = 0.0;      // c_fee * delta^2
  double trading = 0.0;  // lambda_omega |w| + rho_omega w^2 / 2
  double stage() const { return peg + fee + trading - carry; }
};

struct RevenueBreakdown {
  double carry = 0.0;
  double peg = 0.0;
  double fee = 0.0;
  double trading = 0.0;
  double total = 0.0;  // carry - peg - fee - trading
};

struct RunRecord {
  ScenarioId scenario = ScenarioId::single_shock;
  PolicyKind policy = PolicyKind::optimal_window;
  int replica = 0;
  std::uint64_t event_seed = 0;
  std::uint64_t scenario_seed = 0;
  std::optional<double> chi;
  double window_hours = 8.0;
  double substep_hours = 0.1;

  std::vector<WindowLog> windows;
  // One entry per simulated substep; stops at depeg or exhaustion. May be
  // released after the summary fields below are filled.
  std::vector<SubstepCost> substep_costs;

  bool depegged = false;
  std::optional<double> depeg_time;       // hours
  std::optional<double> exhaustion_time;  // hours
  double total_shortfall = 0.0;
  double max_delta_p = 0.0;
  double max_conservation_error = 0.0;  // relative
  double max_balance_drift = 0.0;       // |R_liq + R_bill - S_out| / S_out
  int solver_nonconverged = 0;

  RevenueBreakdown revenue;             // discounted at the configured rho
  double revenue_undiscounted = 0.0;
};

// -sum_i e^{-rho t_i} l_i dt over the recorded substeps.
double total_revenue(const RunRecord& record, double rho);
RevenueBreakdown revenue_breakdown(const RunRecord& record, double rho);

int depeg_indicator(const RunRecord& record);

// First window at or after onset where w < -0.05 w_max and w is at least twice
// as negative as the mean w of the 10 windows before onset. Returns the lag
// from onset to that window start in days.
std::optional<double> responsiveness_days(const RunRecord& record, double shock_onset_days);

// Realized bills -> cash dollars over windows starting in [from, to) days.
double bills_sold_between(const RunRecord& record, double from_days, double to_days);

}  // namespace reserve
