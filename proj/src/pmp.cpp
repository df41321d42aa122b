#include "reserve/pmp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace reserve {

double stage_cost(const ReserveState& state, const ControlAction& control,
                  const RateEnvironment& rates, const CostTerms& costs) {
  return costs.c_peg * state.delta_p * state.delta_p +
         costs.c_fee * control.delta * control.delta +
         costs.lambda_omega * std::abs(control.omega) +
         0.5 * costs.rho_omega * control.omega * control.omega -
         rates.r_bill * state.r_bill;
}

namespace {

void check_grid(const std::vector<double>& grid, const char* who) {
  if (grid.size() < 2) throw std::invalid_argument(std::string(who) + ": grid too short");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument(std::string(who) + ": grid must be increasing");
}

// Window index of every grid step [grid[i], grid[i+1]).
std::vector<std::size_t> step_windows(const std::vector<double>& grid,
                                      const std::vector<double>& edges) {
  if (edges.size() < 2) throw std::invalid_argument("window grid needs at least one window");
  const double tol = 1e-9 * std::max(1.0, edges.back());
  if (std::abs(edges.front() - grid.front()) > tol ||
      std::abs(edges.back() - grid.back()) > tol)
    throw std::invalid_argument("windows must tile the forecast horizon");
  std::vector<std::size_t> out(grid.size() - 1);
  std::size_t j = 0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    while (j + 2 < edges.size() && grid[i] >= edges[j + 1] - tol) ++j;
    out[i] = j;
  }
  return out;
}

double indicator(double excess, double width) {
  if (width <= 0.0) return excess > 0.0 ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-excess / width));
}

const std::vector<double>& demand_series(const FlowForecast& f, ShortfallDemand d) {
  return d == ShortfallDemand::gross ? f.demand_hat : f.q_hat;
}

}  // namespace

namespace {

// Forward RK4 of the surrogate. With clip set, each window's omega is first
// limited to what the path holds when that window opens, so later windows
// only see balances left by the already limited earlier ones.
SurrogatePath run_surrogate(const ReserveState& initial, std::vector<ControlAction>& controls,
                            const std::vector<double>& window_edges,
                            const FlowForecast& forecast, const RateEnvironment& rates,
                            const PegParams& peg, const ShortfallModel& shortfall, bool clip) {
  const auto& grid = forecast.grid;
  check_grid(grid, "integrate_surrogate");
  if (controls.size() + 1 != window_edges.size())
    throw std::invalid_argument("integrate_surrogate: one control per window required");
  if (!(shortfall.window > 0.0))
    throw std::invalid_argument("integrate_surrogate: window must be > 0");
  const auto win = step_windows(grid, window_edges);
  const auto& dem = demand_series(forecast, shortfall.demand);

  const std::size_t n = grid.size();
  SurrogatePath p;
  p.grid = grid;
  p.r_liq.resize(n);
  p.r_bill.resize(n);
  p.delta_p.resize(n);
  double x = initial.r_liq, b = initial.r_bill, dp = initial.delta_p;
  p.r_liq[0] = x;
  p.r_bill[0] = b;
  p.delta_p[0] = dp;

  struct Rhs {
    double x, b, dp;
  };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = grid[i + 1] - grid[i];
    ControlAction& u = controls[win[i]];
    if (clip && (i == 0 || win[i] != win[i - 1])) {
      const double len = window_edges[win[i] + 1] - window_edges[win[i]];
      u.omega = std::clamp(u.omega, -std::max(b, 0.0) / len, std::max(x, 0.0) / len);
    }
    auto rhs = [&](double w, double cx, double cb) {
      // w in {0, 0.5, 1}: position inside the step for the forecast inputs
      const double q = forecast.q_hat[i] + w * (forecast.q_hat[i + 1] - forecast.q_hat[i]);
      const double d = dem[i] + w * (dem[i + 1] - dem[i]);
      const double s = forecast.s_out_hat[i] + w * (forecast.s_out_hat[i + 1] - forecast.s_out_hat[i]);
      return Rhs{rates.r_cash * cx - q - u.omega, rates.r_bill * cb + u.omega,
                 peg_drift_rate(d, cx, s, u.delta, peg, shortfall.window)};
    };
    const Rhs k1 = rhs(0.0, x, b);
    const Rhs k2 = rhs(0.5, x + 0.5 * h * k1.x, b + 0.5 * h * k1.b);
    const Rhs k3 = rhs(0.5, x + 0.5 * h * k2.x, b + 0.5 * h * k2.b);
    const Rhs k4 = rhs(1.0, x + h * k3.x, b + h * k3.b);
    x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    b += h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    dp += h / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    if (!std::isfinite(x) || !std::isfinite(b) || !std::isfinite(dp))
      throw SolverError("integrate_surrogate: non-finite state", {});
    p.r_liq[i + 1] = x;
    p.r_bill[i + 1] = b;
    p.delta_p[i + 1] = dp;
  }
  return p;
}

}  // namespace

SurrogatePath integrate_surrogate(const ReserveState& initial,
                                  const std::vector<ControlAction>& controls,
                                  const std::vector<double>& window_edges,
                                  const FlowForecast& forecast,
                                  const RateEnvironment& rates, const PegParams& peg,
                                  const ShortfallModel& shortfall) {
  std::vector<ControlAction> u = controls;
  return run_surrogate(initial, u, window_edges, forecast, rates, peg, shortfall, false);
}

SurrogatePath integrate_feasible(const ReserveState& initial,
                                 std::vector<ControlAction>& controls,
                                 const std::vector<double>& window_edges,
                                 const FlowForecast& forecast, const RateEnvironment& rates,
                                 const PegParams& peg, const ShortfallModel& shortfall) {
  return run_surrogate(initial, controls, window_edges, forecast, rates, peg, shortfall, true);
}

CostateTrajectory integrate_costates(const SurrogatePath& path,
                                     const FlowForecast& forecast,
                                     const RateEnvironment& rates, const CostTerms& costs,
                                     const PegParams& peg, const Costates& terminal,
                                     const ShortfallModel& shortfall, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_costates: dt must be > 0");
  const auto& grid = path.grid;
  check_grid(grid, "integrate_costates");
  if (forecast.grid.size() != grid.size())
    throw std::invalid_argument("integrate_costates: paths must share one grid");
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(forecast.grid[i] - grid[i]) > 1e-9 * std::max(1.0, grid.back()))
      throw std::invalid_argument("integrate_costates: paths must share one grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - grid[i - 1] - dt) > 1e-9 * dt)
      throw std::invalid_argument("integrate_costates: grid spacing differs from dt");
  if (!(shortfall.window > 0.0))
    throw std::invalid_argument("integrate_costates: window must be > 0");
  const auto& dem = demand_series(forecast, shortfall.demand);

  const double a_liq = rates.rho - rates.r_cash;
  const double a_bill = rates.rho - rates.r_bill;
  const std::size_t n = grid.size();
  CostateTrajectory c;
  c.grid = grid;
  c.p_liq.resize(n);
  c.p_bill.resize(n);
  c.p_dp.resize(n);
  double pl = terminal.liq, pb = terminal.bill, pd = terminal.dp;
  c.p_liq[n - 1] = pl;
  c.p_bill[n - 1] = pb;
  c.p_dp[n - 1] = pd;

  struct Rhs {
    double l, b, d;
  };
  for (std::size_t i = n - 1; i > 0; --i) {
    const double h = -(grid[i] - grid[i - 1]);
    // w measures the position from grid[i] back toward grid[i-1]
    auto coeffs = [&](double w, double& sigma_over_s, double& dp) {
      auto at = [&](const std::vector<double>& v) { return v[i] + w * (v[i - 1] - v[i]); };
      dp = at(path.delta_p);
      const double excess = at(dem) - at(path.r_liq) / shortfall.window;
      sigma_over_s = indicator(excess, shortfall.smoothing_width) / at(forecast.s_out_hat);
    };
    auto rhs = [&](double w, double l, double b, double d) {
      double so = 0.0, dp = 0.0;
      coeffs(w, so, dp);
      return Rhs{a_liq * l + peg.eta * so * d, a_bill * b + rates.r_bill,
                 rates.rho * d - 2.0 * costs.c_peg * dp};
    };
    const Rhs k1 = rhs(0.0, pl, pb, pd);
    const Rhs k2 = rhs(0.5, pl + 0.5 * h * k1.l, pb + 0.5 * h * k1.b, pd + 0.5 * h * k1.d);
    const Rhs k3 = rhs(0.5, pl + 0.5 * h * k2.l, pb + 0.5 * h * k2.b, pd + 0.5 * h * k2.d);
    const Rhs k4 = rhs(1.0, pl + h * k3.l, pb + h * k3.b, pd + h * k3.d);
    pl += h / 6.0 * (k1.l + 2.0 * k2.l + 2.0 * k3.l + k4.l);
    pb += h / 6.0 * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    pd += h / 6.0 * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d);
    if (!std::isfinite(pl) || !std::isfinite(pb) || !std::isfinite(pd))
      throw SolverError("integrate_costates: non-finite costate", {});
    c.p_liq[i - 1] = pl;
    c.p_bill[i - 1] = pb;
    c.p_dp[i - 1] = pd;
  }
  return c;
}

namespace {

template <class F>
double trapezoid(const std::vector<double>& grid, double start, double end, F value_at_index,
                 const char* who) {
  const double tol = 1e-9 * std::max(1.0, grid.back());
  if (!(end > start) || start < grid.front() - tol || end > grid.back() + tol)
    throw std::invalid_argument(std::string(who) + ": window outside the costate grid");
  auto value_at = [&](double t) {
    if (t <= grid.front()) return value_at_index(0);
    if (t >= grid.back()) return value_at_index(grid.size() - 1);
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    const double w = (t - grid[hi - 1]) / (grid[hi] - grid[hi - 1]);
    return value_at_index(hi - 1) + w * (value_at_index(hi) - value_at_index(hi - 1));
  };
  auto first = std::upper_bound(grid.begin(), grid.end(), start + tol);
  double sum = 0.0;
  double t_prev = start;
  double v_prev = value_at(start);
  for (auto it = first; it != grid.end() && *it < end - tol; ++it) {
    const std::size_t k = static_cast<std::size_t>(it - grid.begin());
    const double v = value_at_index(k);
    sum += 0.5 * (*it - t_prev) * (v + v_prev);
    t_prev = *it;
    v_prev = v;
  }
  sum += 0.5 * (end - t_prev) * (value_at(end) + v_prev);
  return sum;
}

}  // namespace

double switching_integral(const CostateTrajectory& c, double start, double end) {
  return trapezoid(c.grid, start, end,
                   [&](std::size_t k) { return c.p_bill[k] - c.p_liq[k]; },
                   "switching_integral");
}

double average_peg_costate(const CostateTrajectory& c, double start, double end) {
  return trapezoid(c.grid, start, end, [&](std::size_t k) { return c.p_dp[k]; },
                   "average_peg_costate") /
         (end - start);
}

double surrogate_objective(const SurrogatePath& path,
                           const std::vector<ControlAction>& controls,
                           const std::vector<double>& window_edges,
                           const RateEnvironment& rates, const CostTerms& costs) {
  const auto win = step_windows(path.grid, window_edges);
  double total = 0.0;
  const double t0 = path.grid.front();
  auto state = [&](std::size_t k) {
    ReserveState s;
    s.r_liq = path.r_liq[k];
    s.r_bill = path.r_bill[k];
    s.delta_p = path.delta_p[k];
    return s;
  };
  for (std::size_t i = 0; i + 1 < path.grid.size(); ++i) {
    const ControlAction& u = controls[win[i]];
    const double h = path.grid[i + 1] - path.grid[i];
    const double a = std::exp(-rates.rho * (path.grid[i] - t0)) *
                     stage_cost(state(i), u, rates, costs);
    const double b = std::exp(-rates.rho * (path.grid[i + 1] - t0)) *
                     stage_cost(state(i + 1), u, rates, costs);
    total += 0.5 * h * (a + b);
  }
  return total;
}

WindowEvaluation evaluate_controls(const ReserveState& initial,
                                   const std::vector<ControlAction>& controls,
                                   const std::vector<double>& window_edges,
                                   const FlowForecast& forecast,
                                   const RateEnvironment& rates, const CostTerms& costs,
                                   const PegParams& peg, const ShortfallModel& shortfall,
                                   const ControlLimits& limits, double dt) {
  WindowEvaluation ev;
  ev.path = integrate_surrogate(initial, controls, window_edges, forecast, rates, peg, shortfall);
  ev.costates = integrate_costates(ev.path, forecast, rates, costs, peg, Costates{}, shortfall, dt);
  const std::size_t n = controls.size();
  ev.switching.resize(n);
  ev.p_dp_avg.resize(n);
  ev.omega_law.resize(n);
  ev.target.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = window_edges[j], b = window_edges[j + 1];
    const double len = b - a;
    ev.switching[j] = switching_integral(ev.costates, a, b);
    ev.p_dp_avg[j] = average_peg_costate(ev.costates, a, b);
    ev.omega_law[j] = window_reallocation(ev.switching[j], len, costs, limits.omega_max);
    // Cannot buy with cash or sell bills that the plan does not hold at the
    // window start.
    const double r_liq = interpolate(ev.path.grid, ev.path.r_liq, a);
    const double r_bill = interpolate(ev.path.grid, ev.path.r_bill, a);
    const double hi = std::max(r_liq, 0.0) / len;
    const double lo = -std::max(r_bill, 0.0) / len;
    ev.target[j].omega = std::clamp(ev.omega_law[j], std::min(lo, 0.0), std::max(hi, 0.0));
    ev.target[j].delta = window_fee(ev.p_dp_avg[j], peg.gamma, costs.c_fee, limits.delta_max);
  }
  ev.objective = surrogate_objective(ev.path, controls, window_edges, rates, costs);
  return ev;
}

std::vector<double> uniform_window_edges(int windows, double window_length) {
  if (windows < 1 || !(window_length > 0.0))
    throw std::invalid_argument("uniform_window_edges: need >= 1 window of positive length");
  std::vector<double> e(static_cast<std::size_t>(windows) + 1);
  for (std::size_t j = 0; j < e.size(); ++j) e[j] = static_cast<double>(j) * window_length;
  return e;
}

namespace {

// Past the point where the forecast supply runs out nothing is left to redeem
// or mint; the last positive supply level is carried so the peg term stays finite.
FlowForecast pad_forecast(FlowForecast f, const std::vector<double>& grid, double floor_supply) {
  if (f.grid.empty()) {
    f.grid.push_back(grid.front());
    f.q_hat.push_back(0.0);
    f.demand_hat.push_back(0.0);
    f.s_out_hat.push_back(floor_supply);
  }
  const double s_last = std::max(f.s_out_hat.back(), floor_supply);
  for (std::size_t i = f.grid.size(); i < grid.size(); ++i) {
    f.grid.push_back(grid[i]);
    f.q_hat.push_back(0.0);
    f.demand_hat.push_back(0.0);
    f.s_out_hat.push_back(s_last);
  }
  for (double& s : f.s_out_hat) s = std::max(s, floor_supply);
  return f;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

RollPlan solve_mpc_roll(const RollInputs& in) {
  const auto& edges = in.window_edges;
  if (edges.size() < 2 || edges.front() != 0.0)
    throw std::invalid_argument("solve_mpc_roll: window grid must start at 0");
  for (std::size_t j = 1; j < edges.size(); ++j)
    if (!(edges[j] > edges[j - 1]))
      throw std::invalid_argument("solve_mpc_roll: window grid must be increasing");
  if (!(in.sweep.tol > 0.0)) throw std::invalid_argument("solve_mpc_roll: tol must be > 0");
  if (in.sweep.max_iter < 1) throw std::invalid_argument("solve_mpc_roll: max_iter must be >= 1");
  if (!(in.sweep.damping > 0.0 && in.sweep.damping <= 1.0))
    throw std::invalid_argument("solve_mpc_roll: damping must be in (0, 1]");
  if (!(in.limits.omega_max >= 0.0) || !(in.limits.delta_max >= 0.0))
    throw std::invalid_argument("solve_mpc_roll: control bounds must be >= 0");
  if (!(in.measured.s_out > 0.0))
    throw std::invalid_argument("solve_mpc_roll: outstanding supply must be > 0");

  const std::size_t n = edges.size() - 1;
  const double horizon = edges.back();
  ShortfallModel sm;
  sm.window = edges[1] - edges[0];
  sm.smoothing_width = in.smoothing_fraction * in.measured.s_out / sm.window;
  sm.demand = in.demand;

  std::vector<ControlAction> u(n);
  if (!in.warm_start.empty()) {
    for (std::size_t j = 0; j < n; ++j) {
      const ControlAction& w = in.warm_start[std::min(j, in.warm_start.size() - 1)];
      u[j].omega = project(w.omega, in.limits.omega_max);
      u[j].delta = project(w.delta, in.limits.delta_max);
    }
  }

  ReserveState x0 = in.measured;
  x0.t = 0.0;
  SurrogatePath plan_path;  // previous iterate, drives the peg plan
  const double dp_now = std::clamp(in.measured.delta_p, -1.0, 1.0);
  auto peg_plan = [&](double t) {
    if (plan_path.grid.empty()) return dp_now;
    return std::clamp(interpolate(plan_path.grid, plan_path.delta_p, t), -1.0, 1.0);
  };

  std::vector<double> step_w(n, in.sweep.damping), step_d(n, in.sweep.damping);
  std::vector<int> dir_w(n, 0), dir_d(n, 0);
  const double scale_w = in.limits.omega_max > 0.0 ? in.limits.omega_max : 1.0;
  const double scale_d = in.limits.delta_max > 0.0 ? in.limits.delta_max : 1.0;

  RollPlan plan;
  WindowEvaluation ev;
  FlowForecast flow;
  int growth = 0;
  double prev_change = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= in.sweep.max_iter; ++it) {
    const MeanIntensityPath mean =
        propagate_moments(in.lambda_r, in.lambda_m, in.params_r, in.params_m, in.feedback,
                          peg_plan, horizon, in.dt);
    flow = pad_forecast(expected_net_flow_truncated(mean, in.params_r.mark_mean,
                                                    in.params_m.mark_mean, in.measured.s_out),
                        mean.grid, 1e-3 * in.measured.s_out);
    ev = evaluate_controls(x0, u, edges, flow, in.rates, in.costs, in.peg, sm, in.limits, in.dt);
    plan.objective_history.push_back(ev.objective);

    const std::vector<ControlAction> before = u;
    for (std::size_t j = 0; j < n; ++j) {
      const double dw = ev.target[j].omega - u[j].omega;
      const double dd = ev.target[j].delta - u[j].delta;
      // A reversal means the window is straddling a kink; shrink its step.
      if (sign_of(dw) != 0 && sign_of(dw) == -dir_w[j]) step_w[j] *= 0.5;
      if (sign_of(dd) != 0 && sign_of(dd) == -dir_d[j]) step_d[j] *= 0.5;
      if (sign_of(dw) != 0) dir_w[j] = sign_of(dw);
      if (sign_of(dd) != 0) dir_d[j] = sign_of(dd);
      u[j].omega = project(u[j].omega + step_w[j] * dw, in.limits.omega_max);
      u[j].delta = project(u[j].delta + step_d[j] * dd, in.limits.delta_max);
    }
    integrate_feasible(x0, u, edges, flow, in.rates, in.peg, sm);
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      change = std::max({change, std::abs(u[j].omega - before[j].omega) / scale_w,
                         std::abs(u[j].delta - before[j].delta) / scale_d});
    plan.change_history.push_back(change);
    plan.iterations = it;
    plan_path = ev.path;

    if (change < in.sweep.tol) {
      plan.converged = true;
      break;
    }
    growth = change > prev_change ? growth + 1 : 0;
    prev_change = change;
    if (growth > 0) {
      // Any growth tightens every window; a genuine instability still grows
      // through repeated halvings and is reported below.
      for (double& a : step_w) a *= 0.5;
      for (double& a : step_d) a *= 0.5;
    }
    if (growth >= in.sweep.divergence_run) {
      std::ostringstream msg;
      msg << "solve_mpc_roll: control change grew for " << growth
          << " consecutive iterations (last " << change << ")";
      throw SolverError(msg.str(), plan.change_history);
    }
  }

  plan.state_path = integrate_surrogate(x0, u, edges, flow, in.rates, in.peg, sm);
  plan.objective = surrogate_objective(plan.state_path, u, edges, in.rates, in.costs);
  plan.forecast = std::move(flow);
  plan.windows.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    plan.windows[j].start = edges[j];
    plan.windows[j].end = edges[j + 1];
    plan.windows[j].control = u[j];
    plan.windows[j].switching = ev.switching[j];
    plan.windows[j].p_dp_avg = ev.p_dp_avg[j];
  }
  return plan;
}

}  // namespace reserve
