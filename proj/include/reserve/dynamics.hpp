#pragma once

// True (simulation) evolution of the reserve balance sheet and peg deviation.

#include <span>
#include <stdexcept>

#include "reserve/control_action.hpp"
#include "reserve/hawkes.hpp"

namespace reserve {

class DynamicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReserveState {
  double r_liq = 0.0;    // $
  double r_bill = 0.0;   // $ face value
  double delta_p = 0.0;  // peg deviation, 1 = complete depeg
  double s_out = 0.0;    // $ outstanding supply
  double t = 0.0;        // hours
};

// All rates per hour.
struct RateEnvironment {
  double r_cash = 0.0;
  double r_bill = 0.0;
  double rho = 0.0;
};

struct PegParams {
  double eta = 10.0;
  double gamma = 5.0;
};

enum class StepStatus { active, depegged, exhausted };

struct StepResult {
  ReserveState state;
  StepStatus status = StepStatus::active;
  double shortfall = 0.0;         // unmet redemption dollars
  double redeemed = 0.0;          // D_R actually processed
  double minted = 0.0;            // D_M
  double dropped_redemptions = 0.0;  // requests beyond outstanding supply
  double interest = 0.0;          // cash + bill accrual over the step
  double omega_applied = 0.0;     // $/hour after feasibility clipping
  bool omega_clipped = false;
};

// One simulation substep [t, t+dt). Events outside that interval are ignored
// by the caller's contract and rejected here.
StepResult step_state(const ReserveState& state, std::span<const MarkedEvent> events,
                      const ControlAction& control, const RateEnvironment& rates,
                      const PegParams& peg, double dt, double omega_max);

// Peg drift of the deterministic surrogate: cash stock is turned into a
// per-window capacity rate before comparing with the flow q.
double peg_drift_rate(double q, double r_liq, double s_out, double delta,
                      const PegParams& peg, double window);

}  // namespace reserve
