#include <cmath>

#include "doctest.h"
#include "reserve/metrics.hpp"

using namespace reserve;

namespace {

RunRecord with_windows(const std::vector<double>& omegas, double omega_max) {
  RunRecord r;
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    WindowLog w;
    w.t_start = 8.0 * static_cast<double>(j);
    w.control.omega = omegas[j];
    w.omega_max = omega_max;
    w.bills_sold = omegas[j] < 0.0 ? -omegas[j] * 8.0 : 0.0;
    r.windows.push_back(w);
  }
  return r;
}

}  // namespace

TEST_CASE("carry-only run earns r_bill R_bill per hour") {
  RunRecord r;
  const double r_bill = 4.93e-5 / 8.0;
  for (int i = 0; i < 80; ++i) r.substep_costs.push_back({r_bill * 9e9, 0, 0, 0});
  const double rho = 7.31e-5 / 8.0;
  CHECK(total_revenue(r, rho) == doctest::Approx(r_bill * 9e9 * 8.0).epsilon(1e-4));
  CHECK(total_revenue(r, 0.0) == doctest::Approx(r_bill * 9e9 * 8.0).epsilon(1e-12));
  CHECK(total_revenue(r, rho) > 0.0);
  CHECK(total_revenue(r, rho) < total_revenue(r, 0.0));
}

TEST_CASE("empty cost path is worth nothing") {
  RunRecord r;
  for (int i = 0; i < 100; ++i) r.substep_costs.push_back({});
  CHECK(total_revenue(r, 1e-5) == 0.0);
  CHECK(revenue_breakdown(r, 1e-5).total == 0.0);
}

TEST_CASE("revenue decomposition sums to the total") {
  RunRecord r;
  for (int i = 0; i < 2760; ++i) {
    const double x = static_cast<double>(i);
    r.substep_costs.push_back({5e4 + 10.0 * std::sin(x), 1e3 * std::cos(x) * std::cos(x),
                               2.0 + std::sin(0.1 * x), 30.0 * std::abs(std::sin(0.01 * x))});
  }
  const double rho = 9.1e-6;
  const auto b = revenue_breakdown(r, rho);
  CHECK(b.total == doctest::Approx(b.carry - b.peg - b.fee - b.trading).epsilon(1e-12));
  CHECK(std::abs(b.total - total_revenue(r, rho)) <= 1e-9 * std::abs(b.total));
  CHECK(b.carry > 0.0);
  CHECK(b.peg > 0.0);
}

TEST_CASE("depeg indicator") {
  RunRecord r;
  r.max_delta_p = 0.3;
  CHECK(depeg_indicator(r) == 0);
  r.depegged = true;
  r.depeg_time = 40.0 * 24.0;
  CHECK(depeg_indicator(r) == 1);
}

TEST_CASE("responsiveness detection") {
  std::vector<double> quiet(120, 1e7);
  CHECK_FALSE(responsiveness_days(with_windows(quiet, 1e8), 30.0).has_value());

  // onset at day 30 is window 90; first move one window later
  std::vector<double> omegas(120, 0.0);
  for (std::size_t j = 91; j < omegas.size(); ++j) omegas[j] = -1e8;
  auto d = responsiveness_days(with_windows(omegas, 1e8), 30.0);
  REQUIRE(d.has_value());
  CHECK(*d <= 1.0 / 3.0 + 1e-12);
  CHECK(*d == doctest::Approx(1.0 / 3.0));

  // small sells below 5% of the bound do not count
  std::vector<double> small(120, 0.0);
  for (std::size_t j = 90; j < small.size(); ++j) small[j] = -4e6;
  CHECK_FALSE(responsiveness_days(with_windows(small, 1e8), 30.0).has_value());

  // a policy already selling before onset must sell twice as hard
  std::vector<double> steady(120, -2e7);
  steady[100] = -3e7;
  steady[105] = -5e7;
  auto late = responsiveness_days(with_windows(steady, 1e8), 30.0);
  REQUIRE(late.has_value());
  CHECK(*late == doctest::Approx(15.0 * 8.0 / 24.0));

  // windows after termination are ignored
  auto stopped = with_windows(omegas, 1e8);
  for (std::size_t j = 91; j < stopped.windows.size(); ++j)
    stopped.windows[j].status = StepStatus::depegged;
  CHECK_FALSE(responsiveness_days(stopped, 30.0).has_value());
}

TEST_CASE("bills sold over a day range") {
  std::vector<double> omegas(276, 0.0);
  for (std::size_t j = 90; j < 105; ++j) omegas[j] = -1e6;
  omegas[200] = -1e6;
  omegas[95] = 5e6;
  auto r = with_windows(omegas, 1e8);
  CHECK(bills_sold_between(r, 30.0, 35.0) == doctest::Approx(14.0 * 8e6));
  CHECK(bills_sold_between(r, 30.0, 45.0) == doctest::Approx(14.0 * 8e6));
  CHECK(bills_sold_between(r, 0.0, 92.0) == doctest::Approx(15.0 * 8e6));
  CHECK(bills_sold_between(r, 0.0, 30.0) == 0.0);
}
