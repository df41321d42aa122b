#include "reserve/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace reserve {

std::string_view to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::single_shock: return "single_shock";
    case ScenarioId::prolonged_clustering: return "prolonged_clustering";
    case ScenarioId::false_alarm: return "false_alarm";
  }
  return "unknown";
}

ScenarioId parse_scenario(std::string_view text) {
  if (text == "single_shock" || text == "1") return ScenarioId::single_shock;
  if (text == "prolonged_clustering" || text == "2") return ScenarioId::prolonged_clustering;
  if (text == "false_alarm" || text == "3") return ScenarioId::false_alarm;
  throw std::invalid_argument("unknown scenario: " + std::string(text));
}

int scenario_index(ScenarioId id) {
  switch (id) {
    case ScenarioId::single_shock: return 1;
    case ScenarioId::prolonged_clustering: return 2;
    case ScenarioId::false_alarm: return 3;
  }
  return 0;
}

namespace {

ScheduleSegment segment(double from, double to, double mult_r = 1.0, double mult_m = 1.0) {
  ScheduleSegment s;
  s.t_start = from;
  s.t_end = to;
  s.mult_lambda0_r = mult_r;
  s.mult_lambda0_m = mult_m;
  return s;
}

}  // namespace

ScenarioSchedule build_schedule_with_chi(ScenarioId id, double chi) {
  ScenarioSchedule s;
  s.id = id;
  const double end = s.horizon_days;
  switch (id) {
    case ScenarioId::single_shock: {
      if (!(chi > 0.0)) throw std::invalid_argument("build_schedule: chi must be > 0");
      s.chi = chi;
      ScheduleSegment tail = segment(45.0, end);
      tail.recovery_tail = true;
      s.segments = {segment(0.0, 30.0), segment(30.0, 45.0, chi), tail};
      break;
    }
    case ScenarioId::prolonged_clustering: {
      ScheduleSegment cluster = segment(30.0, 70.0);
      cluster.branching_r = 0.85;
      cluster.branching_m = 0.85;
      s.segments = {segment(0.0, 30.0), cluster, segment(70.0, end)};
      break;
    }
    case ScenarioId::false_alarm: {
      s.segments = {segment(0.0, 30.0), segment(30.0, 32.0, 1.0, 3.0),
                    segment(32.0, 35.0, 1.5, 1.0), segment(35.0, end)};
      break;
    }
  }
  return s;
}

ScenarioSchedule build_schedule(ScenarioId id, Rng& rng) {
  double chi = 1.0;
  if (id == ScenarioId::single_shock) {
    std::uniform_real_distribution<double> u(2.0, 4.0);
    chi = u(rng);
  }
  return build_schedule_with_chi(id, chi);
}

std::pair<HawkesParams, HawkesParams> params_at(const ScenarioSchedule& schedule, double t_days,
                                                const HawkesParams& base_r,
                                                const HawkesParams& base_m) {
  if (!(t_days >= 0.0 && t_days <= schedule.horizon_days))
    throw std::invalid_argument("params_at: t outside the scenario horizon");
  const ScheduleSegment* seg = nullptr;
  for (const auto& s : schedule.segments) {
    if (t_days >= s.t_start && t_days < s.t_end) {
      seg = &s;
      break;
    }
  }
  if (!seg) seg = &schedule.segments.back();

  HawkesParams r = base_r, m = base_m;
  r.lambda0 *= seg->mult_lambda0_r;
  m.lambda0 *= seg->mult_lambda0_m;
  if (seg->branching_r) r.kappa = *seg->branching_r * r.theta;
  if (seg->branching_m) m.kappa = *seg->branching_m * m.theta;
  if (seg->recovery_tail && schedule.chi) {
    const double excess = *schedule.chi - 1.0;
    r.lambda0 = base_r.lambda0 *
                (1.0 + excess * std::exp(-(t_days - seg->t_start) / schedule.recovery_days));
  }
  return {r, m};
}

}  // namespace reserve
