#include "reserve/moments.hpp"

#include <algorithm>
#include <cmath>

namespace reserve {

namespace {

std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagate_moments: dt must be > 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("propagate_moments: horizon must be > 0");
  const double n = std::round(horizon / dt);
  if (std::abs(n * dt - horizon) > 1e-9 * horizon)
    throw std::invalid_argument("propagate_moments: horizon is not a multiple of dt");
  return static_cast<std::size_t>(n);
}

}  // namespace

MeanIntensityPath propagate_moments(double init_r, double init_m,
                                    const HawkesParams& params_r,
                                    const HawkesParams& params_m,
                                    PegFeedback feedback, const PegPlan& peg_plan,
                                    double horizon, double dt) {
  if (!(init_r >= 0.0) || !(init_m >= 0.0))
    throw std::invalid_argument("propagate_moments: initial intensities must be >= 0");
  const std::size_t n = step_count(horizon, dt);

  const double zeta = feedback.zeta;
  auto peg_term = [&](double t) {
    if (zeta == 0.0) return 0.0;
    const double dp = peg_plan(t);
    return zeta * dp * dp;
  };
  auto rhs_r = [&](double t, double l) {
    return -params_r.theta * (l - params_r.lambda0) + params_r.kappa * l + peg_term(t);
  };
  auto rhs_m = [&](double l) {
    return -params_m.theta * (l - params_m.lambda0) + params_m.kappa * l;
  };

  MeanIntensityPath path;
  path.grid.resize(n + 1);
  path.lambda_r.resize(n + 1);
  path.lambda_m.resize(n + 1);
  double lr = init_r;
  double lm = init_m;
  path.grid[0] = 0.0;
  path.lambda_r[0] = lr;
  path.lambda_m[0] = lm;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double k1 = rhs_r(t, lr);
    const double k2 = rhs_r(t + 0.5 * dt, lr + 0.5 * dt * k1);
    const double k3 = rhs_r(t + 0.5 * dt, lr + 0.5 * dt * k2);
    const double k4 = rhs_r(t + dt, lr + dt * k3);
    lr += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double m1 = rhs_m(lm);
    const double m2 = rhs_m(lm + 0.5 * dt * m1);
    const double m3 = rhs_m(lm + 0.5 * dt * m2);
    const double m4 = rhs_m(lm + dt * m3);
    lm += dt / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);

    if (!std::isfinite(lr) || !std::isfinite(lm))
      throw ForecastError("propagate_moments: non-finite mean intensity");
    path.grid[i + 1] = static_cast<double>(i + 1) * dt;
    path.lambda_r[i + 1] = std::max(lr, 0.0);
    path.lambda_m[i + 1] = std::max(lm, 0.0);
  }
  return path;
}

namespace {

FlowForecast build_flow(const MeanIntensityPath& path, double mark_mean_r,
                        double mark_mean_m, double s_out0, bool truncate) {
  if (path.grid.empty()) throw std::invalid_argument("expected_net_flow: empty path");
  if (!(s_out0 > 0.0)) throw ForecastError("expected_net_flow: initial supply must be > 0");
  const std::size_t n = path.grid.size();
  FlowForecast f;
  f.grid.reserve(n);
  f.q_hat.reserve(n);
  f.s_out_hat.reserve(n);
  f.demand_hat.reserve(n);
  double supply = s_out0;
  for (std::size_t i = 0; i < n; ++i) {
    const double demand = mark_mean_r * path.lambda_r[i];
    const double q = demand - mark_mean_m * path.lambda_m[i];
    if (i > 0) {
      const double h = path.grid[i] - path.grid[i - 1];
      supply -= 0.5 * h * (q + f.q_hat.back());
      if (!(supply > 0.0)) {
        if (truncate) break;
        throw ForecastError("expected_net_flow: forecast supply exhausted");
      }
    }
    f.grid.push_back(path.grid[i]);
    f.q_hat.push_back(q);
    f.s_out_hat.push_back(supply);
    f.demand_hat.push_back(demand);
  }
  return f;
}

}  // namespace

FlowForecast expected_net_flow(const MeanIntensityPath& path, double mark_mean_r,
                               double mark_mean_m, double s_out0) {
  return build_flow(path, mark_mean_r, mark_mean_m, s_out0, false);
}

FlowForecast expected_net_flow_truncated(const MeanIntensityPath& path,
                                         double mark_mean_r, double mark_mean_m,
                                         double s_out0) {
  return build_flow(path, mark_mean_r, mark_mean_m, s_out0, true);
}

double interpolate(const std::vector<double>& grid, const std::vector<double>& values,
                   double t) {
  if (grid.empty()) return 0.0;
  if (t <= grid.front()) return values.front();
  if (t >= grid.back()) return values.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
  return values[lo] + w * (values[hi] - values[lo]);
}

}  // namespace reserve
