#include "reserve/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

#include "reserve/pmp.hpp"

namespace reserve {

ReplicaSeeds replica_seeds(std::uint64_t master_seed, ScenarioId scenario, int replica) {
  const auto r = static_cast<std::uint64_t>(replica);
  ReplicaSeeds s;
  s.events = mix_seed(mix_seed(master_seed, 0x45564e54ULL), r);
  s.scenario = mix_seed(mix_seed(master_seed, 0x5343454eULL + scenario_index(scenario)), r);
  return s;
}

namespace {

std::vector<ControlAction> shifted(const RollPlan& plan) {
  std::vector<ControlAction> out;
  for (std::size_t j = 1; j < plan.windows.size(); ++j) out.push_back(plan.windows[j].control);
  if (!plan.windows.empty()) out.push_back(plan.windows.back().control);
  return out;
}

}  // namespace

RunRecord run_replica(const ExperimentConfig& config, ScenarioId scenario, PolicyKind policy,
                      int replica, const RunOptions& options) {
  validate(config);
  const ReplicaSeeds seeds = replica_seeds(config.master_seed, scenario, replica);
  Rng scenario_rng(seeds.scenario);
  const ScenarioSchedule schedule = build_schedule(scenario, scenario_rng);
  Rng event_rng(seeds.events);

  const HawkesParams base_r = config.base_r();
  const HawkesParams base_m = config.base_m();
  const RateEnvironment rates = config.rates();
  const CostTerms costs = config.costs();
  const PegParams peg = config.peg();
  const double window = config.window_hours;
  const int n_windows = config.windows();
  const int n_sub = config.substeps_per_window();
  const double dt = config.substep_hours;
  ThinningOptions thinning;
  thinning.band_height = config.band_height;
  thinning.refresh_step = dt;
  thinning.explosion_limit = config.explosion_limit;

  RunRecord rec;
  rec.scenario = scenario;
  rec.policy = policy;
  rec.replica = replica;
  rec.event_seed = seeds.events;
  rec.scenario_seed = seeds.scenario;
  rec.chi = schedule.chi;
  rec.window_hours = window;
  rec.substep_hours = dt;
  rec.windows.reserve(static_cast<std::size_t>(n_windows));
  if (options.keep_substep_costs)
    rec.substep_costs.reserve(static_cast<std::size_t>(n_windows * n_sub));

  ReserveState state;
  state.s_out = config.s_out0;
  if (policy == PolicyKind::max_liquidity) {
    state.r_liq = config.r_liq0 + config.r_bill0;
  } else {
    state.r_liq = config.r_liq0;
    state.r_bill = config.r_bill0;
  }
  StreamPair streams{{base_r.lambda0, 0.0}, {base_m.lambda0, 0.0}};

  std::vector<double> edges = uniform_window_edges(config.mpc_horizon_windows, window);
  std::vector<ControlAction> warm;
  StepStatus status = StepStatus::active;
  const double rho = rates.rho;

  long substep_index = 0;
  for (int k = 0; k < n_windows; ++k) {
    const double t_k = static_cast<double>(k) * window;
    WindowLog log;
    log.t_start = t_k;
    log.state = state;
    log.state.t = t_k;
    log.status = status;
    log.lambda_r = streams.redemption.current;
    log.lambda_m = streams.mint.current;
    const double s_ref =
        config.omega_max_reference == OmegaMaxReference::initial ? config.s_out0 : state.s_out;
    const double omega_max = config.omega_max_fraction * s_ref / window;
    log.omega_max = omega_max;
    if (status != StepStatus::active) {
      rec.windows.push_back(log);
      continue;
    }

    const auto [pr_k, pm_k] = params_at(schedule, t_k / 24.0, base_r, base_m);
    check_subcritical(pr_k, "redemption");
    check_subcritical(pm_k, "mint");

    ControlAction control;
    switch (policy) {
      case PolicyKind::max_liquidity:
        control = max_liquidity_policy();
        break;
      case PolicyKind::max_yield: {
        const double estimate = base_r.mark_mean * streams.redemption.current * window;
        control = max_yield_policy(state, estimate, omega_max, window);
        break;
      }
      case PolicyKind::optimal_window: {
        RollInputs in;
        in.measured = state;
        in.measured.t = 0.0;
        in.lambda_r = streams.redemption.current;
        in.lambda_m = streams.mint.current;
        in.params_r = pr_k;
        in.params_m = pm_k;
        in.feedback = {config.zeta};
        in.rates = rates;
        in.costs = costs;
        in.peg = peg;
        in.demand = config.shortfall_demand;
        in.smoothing_fraction = config.smoothing_fraction;
        in.window_edges = edges;
        in.dt = dt;
        in.limits = {omega_max, config.delta_max};
        in.sweep = {config.sweep_tol, config.sweep_max_iter, config.sweep_damping,
                    config.divergence_run};
        in.warm_start = warm;
        const RollPlan plan = solve_mpc_roll(in);
        control = plan.windows.front().control;
        log.solver_iterations = plan.iterations;
        log.solver_converged = plan.converged;
        if (!plan.converged) ++rec.solver_nonconverged;
        warm = shifted(plan);
        break;
      }
    }
    log.control = control;

    for (int s = 0; s < n_sub; ++s) {
      const double t = t_k + static_cast<double>(s) * dt;
      const double t1 = t_k + static_cast<double>(s + 1) * dt;
      const auto [pr, pm] = params_at(schedule, t / 24.0, base_r, base_m);
      const double dp_now = state.delta_p;
      SegmentResult seg = simulate_stream_segment(
          pr, pm, {config.zeta}, [dp_now](double) { return dp_now; }, t, t1, streams,
          event_rng, thinning);
      streams = seg.states;

      ReserveState before = state;
      before.t = t;
      const StepResult step = step_state(before, seg.events, control, rates, peg, t1 - t, omega_max);

      SubstepCost cost;
      cost.carry = rates.r_bill * before.r_bill;
      cost.peg = costs.c_peg * before.delta_p * before.delta_p;
      cost.fee = costs.c_fee * control.delta * control.delta;
      cost.trading = costs.lambda_omega * std::abs(step.omega_applied) +
                     0.5 * costs.rho_omega * step.omega_applied * step.omega_applied;
      const double w = std::exp(-rho * static_cast<double>(substep_index) * dt) * dt;
      rec.revenue.carry += w * cost.carry;
      rec.revenue.peg += w * cost.peg;
      rec.revenue.fee += w * cost.fee;
      rec.revenue.trading += w * cost.trading;
      rec.revenue_undiscounted -= cost.stage() * dt;
      if (options.keep_substep_costs) rec.substep_costs.push_back(cost);
      ++substep_index;

      // Reserves move only by interest, net processed flow and the shortfall
      // that the cash floor absorbs.
      const double old_total = before.r_liq + before.r_bill;
      const double new_total = step.state.r_liq + step.state.r_bill;
      const double expected =
          old_total + step.interest + step.minted - step.redeemed + step.shortfall;
      const double scale = std::max({old_total, new_total, 1.0});
      rec.max_conservation_error =
          std::max(rec.max_conservation_error, std::abs(new_total - expected) / scale);

      const double applied = step.omega_applied * (t1 - t);
      if (applied > 0.0) log.bills_bought += applied;
      else log.bills_sold -= applied;
      log.shortfall += step.shortfall;
      rec.total_shortfall += step.shortfall;
      state = step.state;
      rec.max_delta_p = std::max(rec.max_delta_p, state.delta_p);
      if (state.s_out > 0.0)
        rec.max_balance_drift = std::max(
            rec.max_balance_drift, std::abs(new_total - state.s_out) / state.s_out);

      if (step.status == StepStatus::depegged) {
        status = StepStatus::depegged;
        rec.depegged = true;
        rec.depeg_time = t1;
        break;
      }
      if (step.status == StepStatus::exhausted) {
        status = StepStatus::exhausted;
        rec.exhaustion_time = t1;
        break;
      }
    }
    rec.windows.push_back(log);
  }
  rec.revenue.total = rec.revenue.carry - rec.revenue.peg - rec.revenue.fee - rec.revenue.trading;
  return rec;
}

CellSummary summarize_cell(ScenarioId scenario, PolicyKind policy, int requested,
                           const std::vector<const RunRecord*>& records, int failed) {
  CellSummary c;
  c.scenario = scenario;
  c.policy = policy;
  c.replicas = requested;
  c.failed = failed;
  c.completed = static_cast<int>(records.size());
  if (records.empty()) return c;
  double resp = 0.0;
  for (const RunRecord* r : records) {
    c.mean_revenue += r->revenue.total;
    c.mean_revenue_undiscounted += r->revenue_undiscounted;
    c.depeg_frequency += depeg_indicator(*r);
    c.exhaustion_frequency += r->exhaustion_time ? 1.0 : 0.0;
    c.mean_shortfall += r->total_shortfall;
    if (auto d = responsiveness_days(*r, kShockOnsetDay)) {
      resp += *d;
      ++c.responsive_count;
    }
  }
  const double n = static_cast<double>(records.size());
  c.mean_revenue /= n;
  c.mean_revenue_undiscounted /= n;
  c.depeg_frequency /= n;
  c.exhaustion_frequency /= n;
  c.mean_shortfall /= n;
  if (c.responsive_count > 0) c.mean_responsiveness_days = resp / c.responsive_count;
  return c;
}

int worker_count() {
  if (const char* env = std::getenv("RESERVE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress,
                                const RunOptions& options) {
  validate(config);
  struct Job {
    ScenarioId scenario;
    PolicyKind policy;
    int replica;
  };
  std::vector<Job> jobs;
  for (auto s : config.scenarios)
    for (auto p : config.policies)
      for (int r = 0; r < config.replicas; ++r) jobs.push_back({s, p, r});

  std::vector<std::optional<RunRecord>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& j = jobs[i];
      try {
        results[i] = run_replica(config, j.scenario, j.policy, j.replica, options);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(std::string(to_string(j.scenario)) + "/" + std::string(to_string(j.policy)) +
                 "/" + std::to_string(j.replica) + (errors[i].empty() ? " done" : " FAILED: " + errors[i]));
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(worker_count(), static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  ExperimentReport report;
  report.config = config;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (results[i]) report.records.push_back(std::move(*results[i]));
    else report.failures.push_back({jobs[i].scenario, jobs[i].policy, jobs[i].replica, errors[i]});
  }
  for (auto s : config.scenarios) {
    for (auto p : config.policies) {
      std::vector<const RunRecord*> cell;
      for (const auto& r : report.records)
        if (r.scenario == s && r.policy == p) cell.push_back(&r);
      int failed = 0;
      for (const auto& f : report.failures)
        if (f.scenario == s && f.policy == p) ++failed;
      report.cells.push_back(summarize_cell(s, p, config.replicas, cell, failed));
    }
  }
  return report;
}

}  // namespace reserve
