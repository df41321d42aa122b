#pragma once

// Stress scenarios as time-varying Hawkes parameter schedules on a 92-day
// horizon. Times are in days here; the simulator works in hours.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reserve/hawkes.hpp"

namespace reserve {

enum class ScenarioId { single_shock, prolonged_clustering, false_alarm };

std::string_view to_string(ScenarioId id);
ScenarioId parse_scenario(std::string_view text);
int scenario_index(ScenarioId id);  // 1, 2, 3

struct ScheduleSegment {
  double t_start = 0.0;  // days
  double t_end = 0.0;
  double mult_lambda0_r = 1.0;
  double mult_lambda0_m = 1.0;
  // Branching-ratio overrides; kappa is set to ratio * theta of the base stream.
  std::optional<double> branching_r;
  std::optional<double> branching_m;
  // Scenario 1 tail: lambda0_R * (1 + (chi - 1) * exp(-(t - t_start) / recovery_days)).
  bool recovery_tail = false;
};

struct ScenarioSchedule {
  ScenarioId id = ScenarioId::single_shock;
  std::vector<ScheduleSegment> segments;
  std::optional<double> chi;
  double horizon_days = 92.0;
  double recovery_days = 10.0;
};

constexpr double kScenarioHorizonDays = 92.0;
constexpr double kShockOnsetDay = 30.0;

ScenarioSchedule build_schedule(ScenarioId id, Rng& rng);
// Same schedule with the shock multiplier fixed instead of drawn.
ScenarioSchedule build_schedule_with_chi(ScenarioId id, double chi);

std::pair<HawkesParams, HawkesParams> params_at(const ScenarioSchedule& schedule, double t_days,
                                                const HawkesParams& base_r,
                                                const HawkesParams& base_m);

}  // namespace reserve
