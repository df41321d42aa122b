#pragma once

// Window control laws and the two benchmark policies.

#include <stdexcept>
#include <string>
#include <string_view>

#include "reserve/control_action.hpp"
#include "reserve/dynamics.hpp"

namespace reserve {

struct CostTerms {
  double c_peg = 1.5e8;         // $/hour per squared peg unit
  double c_fee = 6e8;           // $/hour per squared fee unit
  double lambda_omega = 1e-4;   // $ per $ reallocated
  double rho_omega = 1e-15;     // hour/$ (quadratic impact on the $/hour rate)
};

enum class PolicyKind { optimal_window, max_yield, max_liquidity };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy(std::string_view text);

// sign(z) * max(|z| - lam, 0)
double shrink(double z, double lam);

double project(double value, double bound);

// Minimiser of lambda_omega*D*|w| + rho_omega*D*w^2/2 + S*w over |w| <= omega_max.
double window_reallocation(double switching, double window, const CostTerms& costs,
                           double omega_max);

double window_fee(double p_dp_avg, double gamma, double c_fee, double delta_max);

ControlAction max_yield_policy(const ReserveState& state, double outflow_estimate,
                               double omega_max, double window);

ControlAction max_liquidity_policy();

}  // namespace reserve
