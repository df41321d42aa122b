#include "reserve/controller.hpp"

#include <algorithm>
#include <cmath>

namespace reserve {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::optimal_window: return "optimal";
    case PolicyKind::max_yield: return "max_yield";
    case PolicyKind::max_liquidity: return "max_liquidity";
  }
  return "unknown";
}

PolicyKind parse_policy(std::string_view text) {
  if (text == "optimal" || text == "optimal_window") return PolicyKind::optimal_window;
  if (text == "max_yield") return PolicyKind::max_yield;
  if (text == "max_liquidity") return PolicyKind::max_liquidity;
  throw std::invalid_argument("unknown policy: " + std::string(text));
}

double shrink(double z, double lam) {
  if (lam < 0.0) throw std::invalid_argument("shrink: threshold must be >= 0");
  const double mag = std::abs(z) - lam;
  if (mag <= 0.0) return 0.0;
  return z > 0.0 ? mag : -mag;
}

double project(double value, double bound) { return std::clamp(value, -bound, bound); }

double window_reallocation(double switching, double window, const CostTerms& costs,
                           double omega_max) {
  if (!(window > 0.0)) throw std::invalid_argument("window_reallocation: window must be > 0");
  if (!(costs.rho_omega > 0.0))
    throw std::invalid_argument("window_reallocation: rho_omega must be > 0 (strict convexity)");
  const double s = shrink(switching, costs.lambda_omega * window);
  if (s == 0.0) return 0.0;
  return project(-s / (costs.rho_omega * window), omega_max);
}

double window_fee(double p_dp_avg, double gamma, double c_fee, double delta_max) {
  if (!(c_fee > 0.0)) throw std::invalid_argument("window_fee: c_fee must be > 0");
  if (delta_max <= 0.0) return 0.0;
  return project(gamma / (2.0 * c_fee) * p_dp_avg, delta_max);
}

ControlAction max_yield_policy(const ReserveState& state, double outflow_estimate,
                               double omega_max, double window) {
  if (!(window > 0.0)) throw std::invalid_argument("max_yield_policy: window must be > 0");
  ControlAction a;
  if (state.r_liq <= outflow_estimate) {
    const double need = (outflow_estimate - state.r_liq) / window;
    a.omega = need > 0.0 ? -std::min(omega_max, need) : 0.0;
  } else {
    a.omega = std::min(omega_max, state.r_liq / window);
  }
  return a;
}

ControlAction max_liquidity_policy() { return {}; }

}  // namespace reserve
