#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "reserve/dynamics.hpp"

using namespace reserve;

namespace {

constexpr double kBig = 1e12;  // omega_max large enough never to bind

MarkedEvent redeem(double t, double size) { return {t, EventKind::redemption, size}; }
MarkedEvent mint(double t, double size) { return {t, EventKind::mint, size}; }

}  // namespace

TEST_CASE("shortfall moves the peg by eta U / S_out") {
  ReserveState s{0.0, 5e9, 0.0, 1e10, 0.0};
  std::vector<MarkedEvent> ev{redeem(0.05, 1e8)};
  auto r = step_state(s, ev, {}, {}, {10.0, 5.0}, 0.1, kBig);
  CHECK(r.shortfall == doctest::Approx(1e8));
  CHECK(r.state.delta_p == doctest::Approx(0.1));
  CHECK(r.state.r_liq == 0.0);
  CHECK(r.state.s_out == doctest::Approx(1e10 - 1e8));
  CHECK(r.status == StepStatus::active);
}

TEST_CASE("covered redemptions leave the peg alone") {
  ReserveState s{5e8, 5e9, 0.2, 1e10, 0.0};
  std::vector<MarkedEvent> ev{redeem(0.01, 4e8), mint(0.02, 1e7)};
  auto r = step_state(s, ev, {}, {}, {10.0, 5.0}, 0.1, kBig);
  CHECK(r.shortfall == 0.0);
  CHECK(r.state.delta_p == 0.2);
  CHECK(r.state.r_liq == doctest::Approx(1.1e8));
}

TEST_CASE("fee heals the peg") {
  ReserveState s{5e8, 5e9, 0.2, 1e10, 0.0};
  auto r = step_state(s, {}, {0.0, 0.01}, {}, {10.0, 5.0}, 0.1, kBig);
  CHECK(r.state.delta_p == doctest::Approx(0.2 - 5.0 * 0.01 * 0.1));
}

TEST_CASE("peg drift rate in capacity form") {
  PegParams p{10.0, 5.0};
  CHECK(peg_drift_rate(2e6, 8e6, 1e10, 0.0, p, 8.0) == doctest::Approx(1e-3));
  CHECK(peg_drift_rate(1e6, 8e6, 1e10, 0.0, p, 8.0) == 0.0);
  CHECK(peg_drift_rate(1e6, 8e6, 1e10, 0.01, p, 8.0) < 0.0);
  CHECK(peg_drift_rate(1e6, 8e6, 1e10, 0.01, p, 8.0) == doctest::Approx(-0.05));
  CHECK_THROWS_AS(peg_drift_rate(1.0, 1.0, 0.0, 0.0, p, 8.0), std::invalid_argument);
  CHECK_THROWS_AS(peg_drift_rate(1.0, 1.0, 1.0, 0.0, p, 0.0), std::invalid_argument);
}

TEST_CASE("reallocation alone conserves total reserves") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    ReserveState s{1e9 * (1 + u(rng)), 9e9 * (1 + u(rng)), 0.0, 1e10, 0.0};
    const double omega = 1e10 * u(rng);
    auto r = step_state(s, {}, {omega, 0.0}, {}, {}, 0.1, 1e10);
    CHECK(r.state.r_liq + r.state.r_bill ==
          doctest::Approx(s.r_liq + s.r_bill).epsilon(1e-14));
    CHECK(r.state.r_liq >= 0.0);
    CHECK(r.state.r_bill >= 0.0);
    CHECK(r.shortfall == 0.0);
  }
}

TEST_CASE("conservation with interest, flows and shortfall") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RateEnvironment rates{1e-6, 6.2e-6, 9e-6};
  for (int i = 0; i < 2000; ++i) {
    ReserveState s{2e8 * u(rng), 9e9 * u(rng), 0.0, 1e10, 0.0};
    std::vector<MarkedEvent> ev;
    for (int k = 0; k < 5; ++k) ev.push_back({0.02 * k, u(rng) < 0.6 ? EventKind::redemption : EventKind::mint, 1e8 * u(rng) + 1.0});
    const double omega = 2e9 * (u(rng) - 0.5);
    auto r = step_state(s, ev, {omega, 0.0}, rates, {}, 0.1, 1e9);
    const double before = s.r_liq + s.r_bill;
    const double after = r.state.r_liq + r.state.r_bill;
    const double expected = before + r.interest + r.minted - r.redeemed + r.shortfall;
    CHECK(std::abs(after - expected) <= 1e-12 * std::max({before, after, 1.0}));
    if (r.shortfall > 0.0) CHECK(r.state.r_liq == 0.0);
  }
}

TEST_CASE("omega is clipped to what the source balance holds") {
  ReserveState s{1e6, 2e6, 0.0, 1e10, 0.0};
  auto buy = step_state(s, {}, {1e8, 0.0}, {}, {}, 0.1, 1e9);
  CHECK(buy.omega_clipped);
  CHECK(buy.omega_applied == doctest::Approx(1e7));
  CHECK(buy.state.r_liq == 0.0);
  CHECK(buy.state.r_bill == doctest::Approx(3e6));

  auto sell = step_state(s, {}, {-1e8, 0.0}, {}, {}, 0.1, 1e9);
  CHECK(sell.omega_clipped);
  CHECK(sell.state.r_bill == 0.0);
  CHECK(sell.state.r_liq == doctest::Approx(3e6));

  CHECK_THROWS_AS(step_state(s, {}, {2e9, 0.0}, {}, {}, 0.1, 1e9), std::invalid_argument);
}

TEST_CASE("interest accrues on both balances") {
  ReserveState s{1e9, 9e9, 0.0, 1e10, 0.0};
  auto r = step_state(s, {}, {}, {1e-6, 2e-6, 3e-6}, {}, 0.5, kBig);
  CHECK(r.interest == doctest::Approx(1e9 * 1e-6 * 0.5 + 9e9 * 2e-6 * 0.5));
  CHECK(r.state.r_bill == doctest::Approx(9e9 * (1 + 1e-6)));
}

TEST_CASE("depeg is absorbing") {
  ReserveState s{0.0, 1e9, 0.95, 1e9, 0.0};
  std::vector<MarkedEvent> ev{redeem(0.0, 1e8)};
  auto r = step_state(s, ev, {}, {}, {10.0, 5.0}, 0.1, kBig);
  CHECK(r.state.delta_p == 1.0);
  CHECK(r.status == StepStatus::depegged);

  std::vector<MarkedEvent> more{mint(0.15, 5e8)};
  auto frozen = step_state(r.state, more, {0.0, 0.01}, {1e-5, 1e-5, 1e-5}, {10.0, 5.0}, 0.1, kBig);
  CHECK(frozen.status == StepStatus::depegged);
  CHECK(frozen.state.delta_p == 1.0);
  CHECK(frozen.state.r_liq == r.state.r_liq);
  CHECK(frozen.state.r_bill == r.state.r_bill);
  CHECK(frozen.state.s_out == r.state.s_out);
}

TEST_CASE("peg deviation is clamped below at -1") {
  ReserveState s{1e9, 1e9, -0.99, 1e10, 0.0};
  auto r = step_state(s, {}, {0.0, 1.0}, {}, {10.0, 5.0}, 0.1, kBig);
  CHECK(r.state.delta_p == -1.0);
}

TEST_CASE("redemptions beyond supply exhaust it") {
  ReserveState s{1e9, 1e9, 0.0, 5e8, 0.0};
  std::vector<MarkedEvent> ev{redeem(0.0, 4e8), redeem(0.05, 4e8)};
  auto r = step_state(s, ev, {}, {}, {}, 0.1, kBig);
  CHECK(r.dropped_redemptions == doctest::Approx(3e8));
  CHECK(r.redeemed == doctest::Approx(5e8));
  CHECK(r.state.s_out == 0.0);
  CHECK(r.status == StepStatus::exhausted);
  CHECK_THROWS_AS(step_state(r.state, {}, {}, {}, {}, 0.1, kBig), DynamicsError);
}

TEST_CASE("step_state input checks") {
  ReserveState s{1e9, 1e9, 0.0, 1e10, 0.0};
  CHECK_THROWS_AS(step_state(s, {}, {}, {}, {}, 0.0, kBig), std::invalid_argument);
  std::vector<MarkedEvent> late{redeem(0.5, 1.0)};
  CHECK_THROWS_AS(step_state(s, late, {}, {}, {}, 0.1, kBig), std::invalid_argument);
  std::vector<MarkedEvent> bad{redeem(0.0, -1.0)};
  CHECK_THROWS_AS(step_state(s, bad, {}, {}, {}, 0.1, kBig), DynamicsError);
  ReserveState nan = s;
  nan.r_liq = NAN;
  CHECK_THROWS_AS(step_state(nan, {}, {}, {}, {}, 0.1, kBig), DynamicsError);
}
