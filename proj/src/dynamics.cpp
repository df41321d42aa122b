#include "reserve/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace reserve {

namespace {

bool finite_state(const ReserveState& s) {
  return std::isfinite(s.r_liq) && std::isfinite(s.r_bill) && std::isfinite(s.delta_p) &&
         std::isfinite(s.s_out) && std::isfinite(s.t);
}

}  // namespace

StepResult step_state(const ReserveState& state, std::span<const MarkedEvent> events,
                      const ControlAction& control, const RateEnvironment& rates,
                      const PegParams& peg, double dt, double omega_max) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_state: dt must be > 0");
  if (!finite_state(state) || !std::isfinite(control.omega) || !std::isfinite(control.delta))
    throw DynamicsError("step_state: non-finite input");
  if (std::abs(control.omega) > omega_max * (1.0 + 1e-12))
    throw std::invalid_argument("step_state: |omega| exceeds omega_max");
  if (!(state.s_out > 0.0)) throw DynamicsError("step_state: supply exhausted");

  StepResult out;
  out.state = state;
  out.state.t = state.t + dt;
  if (state.delta_p >= 1.0) {
    out.state.delta_p = 1.0;
    out.status = StepStatus::depegged;
    return out;
  }

  double d_r = 0.0;
  double d_m = 0.0;
  for (const auto& e : events) {
    if (!(e.size > 0.0) || !std::isfinite(e.size))
      throw DynamicsError("step_state: event size must be positive and finite");
    if (e.time < state.t - 1e-9 || e.time >= state.t + dt + 1e-9)
      throw std::invalid_argument("step_state: event outside [t, t+dt)");
    (e.kind == EventKind::redemption ? d_r : d_m) += e.size;
  }
  // Coins that do not exist cannot be redeemed.
  if (d_r > state.s_out + d_m) {
    out.dropped_redemptions = d_r - (state.s_out + d_m);
    d_r = state.s_out + d_m;
  }

  const double cash_accrued = state.r_liq * (1.0 + rates.r_cash * dt);
  const double bills_accrued = state.r_bill * (1.0 + rates.r_bill * dt);
  out.interest = (cash_accrued - state.r_liq) + (bills_accrued - state.r_bill);

  double omega = control.omega;
  if (omega > 0.0 && omega * dt > cash_accrued) {
    omega = cash_accrued / dt;
    out.omega_clipped = true;
  } else if (omega < 0.0 && -omega * dt > bills_accrued) {
    omega = -bills_accrued / dt;
    out.omega_clipped = true;
  }
  out.omega_applied = omega;

  // A clipped purchase spends the balance exactly; no rounding residue.
  const double cash_available =
      out.omega_clipped && omega > 0.0 ? 0.0 : cash_accrued - omega * dt;
  double cash = cash_available + d_m - d_r;
  if (cash < 0.0) {
    out.shortfall = -cash;
    cash = 0.0;
  }
  double bills = bills_accrued + omega * dt;
  if (out.omega_clipped && omega < 0.0) bills = 0.0;

  double dp = state.delta_p + peg.eta * out.shortfall / state.s_out - peg.gamma * control.delta * dt;
  dp = std::clamp(dp, -1.0, 1.0);

  double supply = state.s_out + d_m - d_r;
  if (out.dropped_redemptions > 0.0) supply = 0.0;

  out.state.r_liq = cash;
  out.state.r_bill = std::max(bills, 0.0);
  out.state.delta_p = dp;
  out.state.s_out = supply;
  out.redeemed = d_r;
  out.minted = d_m;
  if (!finite_state(out.state)) throw DynamicsError("step_state: non-finite result");

  if (dp >= 1.0)
    out.status = StepStatus::depegged;
  else if (!(supply > 0.0))
    out.status = StepStatus::exhausted;
  return out;
}

double peg_drift_rate(double q, double r_liq, double s_out, double delta,
                      const PegParams& peg, double window) {
  if (!(s_out > 0.0)) throw std::invalid_argument("peg_drift_rate: s_out must be > 0");
  if (!(window > 0.0)) throw std::invalid_argument("peg_drift_rate: window must be > 0");
  return peg.eta * std::max(q - r_liq / window, 0.0) / s_out - peg.gamma * delta;
}

}  // namespace reserve
