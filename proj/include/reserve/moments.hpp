#pragma once

// Conditional-mean forecast of Hawkes intensities and dollar flows over an
// MPC planning horizon.

#include <functional>
#include <stdexcept>
#include <vector>

#include "reserve/hawkes.hpp"

namespace reserve {

class ForecastError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MeanIntensityPath {
  std::vector<double> grid;  // hours from the roll start
  std::vector<double> lambda_r;
  std::vector<double> lambda_m;
};

struct FlowForecast {
  std::vector<double> grid;
  std::vector<double> q_hat;      // expected net redemption flow, $/hour
  std::vector<double> s_out_hat;  // expected outstanding supply, $
  std::vector<double> demand_hat; // expected gross redemption flow, $/hour
};

using PegPlan = std::function<double(double)>;

// RK4 integration of
//   dl_R/dt = -theta_R (l_R - lambda0_R) + kappa_R l_R + zeta dP(t)^2
//   dl_M/dt = -theta_M (l_M - lambda0_M) + kappa_M l_M
MeanIntensityPath propagate_moments(double init_r, double init_m,
                                    const HawkesParams& params_r,
                                    const HawkesParams& params_m,
                                    PegFeedback feedback, const PegPlan& peg_plan,
                                    double horizon, double dt);

FlowForecast expected_net_flow(const MeanIntensityPath& path, double mark_mean_r,
                               double mark_mean_m, double s_out0);

// Same as expected_net_flow, but instead of throwing it drops every grid point
// from the first one at which the forecast supply is exhausted.
FlowForecast expected_net_flow_truncated(const MeanIntensityPath& path,
                                         double mark_mean_r, double mark_mean_m,
                                         double s_out0);

// Linear interpolation on a uniform or non-uniform increasing grid, clamped
// at both ends.
double interpolate(const std::vector<double>& grid, const std::vector<double>& values,
                   double t);

}  // namespace reserve
