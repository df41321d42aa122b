#pragma once

// Forward-backward sweep for one MPC roll of the deterministic surrogate.
//
// State (R_liq, R_bill, dP) runs forward under piecewise-constant window
// controls and the moment-closure flow forecast. Current-value costates run
// backward from the terminal condition:
//   dp_liq/dt  = (rho - r_cash) p_liq + eta * 1{shortfall} * p_dp / S_out
//   dp_bill/dt = (rho - r_bill) p_bill + r_bill
//   dp_dp/dt   = rho p_dp - 2 c_peg dP
// Window controls are then refreshed from the window-integrated switching
// function S_j = int (p_bill - p_liq) dt and the window-averaged p_dp.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reserve/controller.hpp"
#include "reserve/dynamics.hpp"
#include "reserve/hawkes.hpp"
#include "reserve/moments.hpp"

namespace reserve {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> change_history)
      : std::runtime_error(what), change_history_(std::move(change_history)) {}
  const std::vector<double>& change_history() const { return change_history_; }

 private:
  std::vector<double> change_history_;
};

struct Costates {
  double liq = 0.0;
  double bill = 0.0;
  double dp = 0.0;
};

struct CostateTrajectory {
  std::vector<double> grid;
  std::vector<double> p_liq;
  std::vector<double> p_bill;
  std::vector<double> p_dp;
};

struct SurrogatePath {
  std::vector<double> grid;
  std::vector<double> r_liq;
  std::vector<double> r_bill;
  std::vector<double> delta_p;
};

// Which expected flow the surrogate compares against cash when deciding
// whether redemptions go unmet within a window.
enum class ShortfallDemand { net, gross };

struct ShortfallModel {
  double window = 8.0;           // hours; cash is spread over one window
  double smoothing_width = 0.0;  // $/hour; 0 gives the sharp indicator
  ShortfallDemand demand = ShortfallDemand::net;
};

double stage_cost(const ReserveState& state, const ControlAction& control,
                  const RateEnvironment& rates, const CostTerms& costs);

// Surrogate state under piecewise-constant controls. window_edges are relative
// hours aligned with the forecast grid; controls has one entry per window.
SurrogatePath integrate_surrogate(const ReserveState& initial,
                                  const std::vector<ControlAction>& controls,
                                  const std::vector<double>& window_edges,
                                  const FlowForecast& forecast,
                                  const RateEnvironment& rates, const PegParams& peg,
                                  const ShortfallModel& shortfall);

// Same integration, but each window's omega is clipped in place so the plan
// never buys with cash or sells bills it does not hold when the window opens.
SurrogatePath integrate_feasible(const ReserveState& initial,
                                 std::vector<ControlAction>& controls,
                                 const std::vector<double>& window_edges,
                                 const FlowForecast& forecast, const RateEnvironment& rates,
                                 const PegParams& peg, const ShortfallModel& shortfall);

CostateTrajectory integrate_costates(const SurrogatePath& path,
                                     const FlowForecast& forecast,
                                     const RateEnvironment& rates, const CostTerms& costs,
                                     const PegParams& peg, const Costates& terminal,
                                     const ShortfallModel& shortfall, double dt);

// Trapezoidal integral of p_bill - p_liq over [start, end].
double switching_integral(const CostateTrajectory& costates, double start, double end);

double average_peg_costate(const CostateTrajectory& costates, double start, double end);

// Discounted surrogate objective int e^{-rho t} l(x, u) dt.
double surrogate_objective(const SurrogatePath& path,
                           const std::vector<ControlAction>& controls,
                           const std::vector<double>& window_edges,
                           const RateEnvironment& rates, const CostTerms& costs);

struct WindowEvaluation {
  SurrogatePath path;
  CostateTrajectory costates;
  std::vector<double> switching;
  std::vector<double> p_dp_avg;
  std::vector<double> omega_law;       // window law, box projection only
  std::vector<ControlAction> target;   // law plus state-feasibility projection
  double objective = 0.0;
};

struct ControlLimits {
  double omega_max = 0.0;
  double delta_max = 0.0;
};

// One forward/backward pass with the controls held fixed.
WindowEvaluation evaluate_controls(const ReserveState& initial,
                                   const std::vector<ControlAction>& controls,
                                   const std::vector<double>& window_edges,
                                   const FlowForecast& forecast,
                                   const RateEnvironment& rates, const CostTerms& costs,
                                   const PegParams& peg, const ShortfallModel& shortfall,
                                   const ControlLimits& limits, double dt);

struct SweepOptions {
  double tol = 1e-6;  // relative to the control bounds
  int max_iter = 50;
  double damping = 0.5;
  int divergence_run = 5;
};

struct RollInputs {
  ReserveState measured;
  double lambda_r = 0.0;  // filtered intensities at the roll time
  double lambda_m = 0.0;
  HawkesParams params_r;
  HawkesParams params_m;
  PegFeedback feedback;
  RateEnvironment rates;
  CostTerms costs;
  PegParams peg;
  ShortfallDemand demand = ShortfallDemand::net;
  double smoothing_fraction = 1e-4;  // width = fraction * S_out / window
  std::vector<double> window_edges;  // relative hours, first entry 0
  double dt = 0.1;
  ControlLimits limits;
  SweepOptions sweep;
  std::vector<ControlAction> warm_start;
};

struct RollWindow {
  double start = 0.0;
  double end = 0.0;
  ControlAction control;
  double switching = 0.0;
  double p_dp_avg = 0.0;
};

struct RollPlan {
  std::vector<RollWindow> windows;
  SurrogatePath state_path;
  FlowForecast forecast;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  std::vector<double> objective_history;
  std::vector<double> change_history;
};

std::vector<double> uniform_window_edges(int windows, double window_length);

RollPlan solve_mpc_roll(const RollInputs& inputs);

}  // namespace reserve
