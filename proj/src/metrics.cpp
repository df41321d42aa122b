#include "reserve/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace reserve {

RevenueBreakdown revenue_breakdown(const RunRecord& record, double rho) {
  RevenueBreakdown r;
  const double dt = record.substep_hours;
  for (std::size_t i = 0; i < record.substep_costs.size(); ++i) {
    const double w = std::exp(-rho * static_cast<double>(i) * dt) * dt;
    const SubstepCost& c = record.substep_costs[i];
    r.carry += w * c.carry;
    r.peg += w * c.peg;
    r.fee += w * c.fee;
    r.trading += w * c.trading;
  }
  r.total = r.carry - r.peg - r.fee - r.trading;
  return r;
}

double total_revenue(const RunRecord& record, double rho) {
  const double dt = record.substep_hours;
  double sum = 0.0;
  for (std::size_t i = 0; i < record.substep_costs.size(); ++i)
    sum -= std::exp(-rho * static_cast<double>(i) * dt) * record.substep_costs[i].stage() * dt;
  return sum;
}

int depeg_indicator(const RunRecord& record) { return record.depegged ? 1 : 0; }

std::optional<double> responsiveness_days(const RunRecord& record, double shock_onset_days) {
  const double onset = shock_onset_days * 24.0;
  const auto& w = record.windows;
  std::size_t first = w.size();
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j].t_start >= onset - 1e-9) {
      first = j;
      break;
    }
  }
  if (first == w.size()) return std::nullopt;
  const std::size_t lookback = std::min<std::size_t>(10, first);
  double pre = 0.0;
  for (std::size_t j = first - lookback; j < first; ++j) pre += w[j].control.omega;
  if (lookback > 0) pre /= static_cast<double>(lookback);
  const double reference = 2.0 * std::min(pre, 0.0);
  for (std::size_t j = first; j < w.size(); ++j) {
    if (w[j].status != StepStatus::active) break;
    const double om = w[j].control.omega;
    if (om < -0.05 * w[j].omega_max && om <= reference)
      return (w[j].t_start - onset) / 24.0;
  }
  return std::nullopt;
}

double bills_sold_between(const RunRecord& record, double from_days, double to_days) {
  double sum = 0.0;
  for (const auto& w : record.windows) {
    const double d = w.t_start / 24.0;
    if (d >= from_days - 1e-12 && d < to_days - 1e-12) sum += w.bills_sold;
  }
  return sum;
}

}  // namespace reserve
