#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "reserve/controller.hpp"
#include "reserve/hawkes.hpp"
#include "reserve/moments.hpp"
#include "reserve/pmp.hpp"

namespace reserve::oracle {

double window_objective(double w, double S, double lam, double rho, double D) {
  return lam * D * std::abs(w) + 0.5 * rho * D * w * w + S * w;
}

double grid_minimize_window(double S, double lam, double rho, double D, double w_max,
                            double cell) {
  const long n = std::lround(w_max / cell);
  double best_w = 0.0;
  double best = window_objective(0.0, S, lam, rho, D);
  for (long i = -n; i <= n; ++i) {
    const double w = std::clamp(static_cast<double>(i) * cell, -w_max, w_max);
    const double v = window_objective(w, S, lam, rho, D);
    if (v < best || (v == best && std::abs(w) < std::abs(best_w))) {
      best = v;
      best_w = w;
    }
  }
  return best_w;
}

double decayed_intensity(double lambda0, double x, double theta, double t) {
  return lambda0 + (x - lambda0) * std::exp(-theta * t);
}

double mean_intensity(double lambda0, double kappa, double theta, double init, double t) {
  const double rate = theta - kappa;
  const double fixed = theta * lambda0 / rate;
  return fixed + (init - fixed) * std::exp(-rate * t);
}

double linear_costate(double a, double f, double T, double t) {
  if (a == 0.0) return -f * (T - t);
  return f / a * (std::exp(a * (t - T)) - 1.0);
}

namespace {

Result check(const std::string& name, bool ok, const std::string& detail) {
  return {name, ok, detail};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Result window_law_grid() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0;
  double worst = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double w_max = std::pow(10.0, 8.0 * u(rng) - 2.0);
    const double D = 0.5 + 15.5 * u(rng);
    const double rho = std::pow(10.0, 4.0 * u(rng) - 2.0) / w_max;
    const double lam = 2.0 * u(rng);
    const double S = (u(rng) - 0.5) * 2.0 * (lam * D + 1.5 * rho * D * w_max);
    const double cell = 1e-4 * w_max;
    CostTerms c;
    c.lambda_omega = lam;
    c.rho_omega = rho;
    const double law = window_reallocation(S, D, c, w_max);
    const double grid = grid_minimize_window(S, lam, rho, D, w_max, cell);
    const double err = std::abs(law - grid) / cell;
    worst = std::max(worst, err);
    if (err > 1.0 + 1e-9) ++bad;
  }
  return check("window law matches grid minimisation (1e4 instances)", bad == 0,
               "worst deviation " + fmt(worst) + " cells");
}

Result dead_zone_boundary() {
  CostTerms c;
  c.lambda_omega = 0.25;
  c.rho_omega = 3.0;
  bool ok = true;
  for (double D : {0.5, 1.0, 8.0, 13.0}) {
    const double edge = c.lambda_omega * D;
    ok = ok && window_reallocation(edge, D, c, 10.0) == 0.0 &&
         window_reallocation(-edge, D, c, 10.0) == 0.0;
  }
  return check("dead-zone boundary gives exactly zero", ok, "");
}

Result decay_closed_form() {
  HawkesParams p{100.0, 0.8, 2.0, 2.5e5};
  double worst = 0.0;
  for (double dt : {0.0, 0.1, 0.5, 1.3, 7.3}) {
    for (double x : {100.0, 180.0, 640.0}) {
      const double got = decay_intensity({x, 0.0}, p, dt).current;
      worst = std::max(worst, std::abs(got - decayed_intensity(100.0, x, 2.0, dt)) / x);
    }
  }
  return check("intensity decay matches exponential closed form", worst <= 1e-14,
               "max rel error " + fmt(worst));
}

Result moment_closed_form() {
  HawkesParams r{100.0, 0.8, 2.0, 2.5e5};
  HawkesParams m{80.0, 0.6, 1.5, 3.0e5};
  const auto path = propagate_moments(100.0, 80.0, r, m, {0.0}, [](double) { return 0.0; },
                                      1.0, 0.1);
  const double got = path.lambda_m.back();
  const double want = mean_intensity(80.0, 0.6, 1.5, 80.0, 1.0);
  const double err = std::abs(got - want) / want;
  return check("mean mint intensity after 1h matches closed form", err <= 1e-6,
               "rel error " + fmt(err));
}

SurrogatePath flat_path(double hours, double dt, double dp) {
  SurrogatePath p;
  const auto n = static_cast<std::size_t>(std::lround(hours / dt)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    p.grid.push_back(static_cast<double>(i) * dt);
    p.r_liq.push_back(1e9);
    p.r_bill.push_back(9e9);
    p.delta_p.push_back(dp);
  }
  return p;
}

FlowForecast calm_forecast(const SurrogatePath& p) {
  FlowForecast f;
  f.grid = p.grid;
  f.q_hat.assign(p.grid.size(), 0.0);
  f.demand_hat.assign(p.grid.size(), 0.0);
  f.s_out_hat.assign(p.grid.size(), 1e10);
  return f;
}

Result bill_costate_closed_form() {
  const RateEnvironment rates{0.0, 4.93e-5 / 8.0, 7.31e-5 / 8.0};
  const auto path = flat_path(72.0, 0.1, 0.0);
  const auto c = integrate_costates(path, calm_forecast(path), rates, CostTerms{}, PegParams{},
                                    Costates{}, ShortfallModel{}, 0.1);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < c.grid.size(); ++i) {
    const double want = linear_costate(rates.rho - rates.r_bill, rates.r_bill, 72.0, c.grid[i]);
    worst = std::max(worst, std::abs(c.p_bill[i] - want) / std::abs(want));
  }
  return check("bill costate matches closed form over 9 windows", worst <= 1e-8,
               "max rel error " + fmt(worst));
}

Result peg_costate_closed_form() {
  const RateEnvironment rates{0.0, 4.93e-5 / 8.0, 7.31e-5 / 8.0};
  const double dp = 0.02;
  const auto path = flat_path(72.0, 0.1, dp);
  CostTerms costs;
  const auto c = integrate_costates(path, calm_forecast(path), rates, costs, PegParams{},
                                    Costates{}, ShortfallModel{}, 0.1);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < c.grid.size(); ++i) {
    const double want = linear_costate(rates.rho, -2.0 * costs.c_peg * dp, 72.0, c.grid[i]);
    worst = std::max(worst, std::abs(c.p_dp[i] - want) / std::abs(want));
  }
  return check("peg costate matches closed form for constant deviation", worst <= 1e-8,
               "max rel error " + fmt(worst));
}

Result peg_costate_sign() {
  const RateEnvironment rates{0.0, 4.93e-5 / 8.0, 7.31e-5 / 8.0};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double most_negative = 0.0;
  for (int k = 0; k < 1000; ++k) {
    auto path = flat_path(72.0, 0.1, 0.0);
    double level = u(rng);
    for (auto& v : path.delta_p) {
      if (u(rng) < 0.05) level = u(rng) < 0.3 ? 0.0 : u(rng);
      v = level;
    }
    const auto c = integrate_costates(path, calm_forecast(path), rates, CostTerms{},
                                      PegParams{}, Costates{}, ShortfallModel{}, 0.1);
    for (double p : c.p_dp) most_negative = std::min(most_negative, p);
  }
  return check("peg costate nonnegative on 1e3 random nonnegative paths", most_negative >= 0.0,
               "min p_dp " + fmt(most_negative));
}

}  // namespace

std::vector<Result> run_all() {
  return {window_law_grid(),        dead_zone_boundary(),      decay_closed_form(),
          moment_closed_form(),     bill_costate_closed_form(), peg_costate_closed_form(),
          peg_costate_sign()};
}

}  // namespace reserve::oracle
