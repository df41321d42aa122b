#pragma once

// Monte Carlo driver: per-replica event/state loop at substep resolution with
// the policy queried once per settlement window, plus a worker pool.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reserve/config.hpp"
#include "reserve/metrics.hpp"

namespace reserve {

struct ReplicaSeeds {
  std::uint64_t events = 0;    // shared by every scenario and policy
  std::uint64_t scenario = 0;  // drives the scenario's random multiplier
};

// Pure function of its arguments; the event stream deliberately ignores
// scenario and policy so that all cells are driven by common random numbers.
ReplicaSeeds replica_seeds(std::uint64_t master_seed, ScenarioId scenario, int replica);

struct RunOptions {
  bool keep_substep_costs = true;
};

// Throws SolverError, SimulationError or DynamicsError on failure.
RunRecord run_replica(const ExperimentConfig& config, ScenarioId scenario, PolicyKind policy,
                      int replica, const RunOptions& options = {});

struct FailedReplica {
  ScenarioId scenario;
  PolicyKind policy;
  int replica;
  std::string error;
};

struct CellSummary {
  ScenarioId scenario = ScenarioId::single_shock;
  PolicyKind policy = PolicyKind::optimal_window;
  int replicas = 0;   // requested
  int completed = 0;
  int failed = 0;
  double mean_revenue = 0.0;
  double mean_revenue_undiscounted = 0.0;
  double depeg_frequency = 0.0;
  std::optional<double> mean_responsiveness_days;
  int responsive_count = 0;
  double exhaustion_frequency = 0.0;
  double mean_shortfall = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<RunRecord> records;  // completed replicas, cell-major order
  std::vector<FailedReplica> failures;
  std::vector<CellSummary> cells;
};

CellSummary summarize_cell(ScenarioId scenario, PolicyKind policy, int requested,
                           const std::vector<const RunRecord*>& records, int failed);

// Worker count comes from RESERVE_WORKERS (default: hardware concurrency).
int worker_count();

using ProgressFn = std::function<void(const std::string&)>;

ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {},
                                const RunOptions& options = {false});

}  // namespace reserve
