#pragma once

// CSV / JSON report files for an experiment.
//   summary.csv                     one row per (scenario, policy) cell
//   replicas.csv                    one row per completed replica
//   trajectory_<scenario>_<policy>.csv   one row per replica and window
//   manifest.json                   config, seeds, failures, version

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "reserve/harness.hpp"

namespace reserve {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::filesystem::path> emit_reports(const ExperimentReport& report,
                                                const std::filesystem::path& directory);

// Round-trip readers used to recompute summaries from the emitted files.
struct ReplicaRow {
  std::string scenario;
  std::string policy;
  int replica = 0;
  double revenue = 0.0;
  double revenue_undiscounted = 0.0;
  int depegged = 0;
  std::string responsiveness_days;  // empty when never triggered
};

struct SummaryRow {
  std::string scenario;
  std::string policy;
  int completed = 0;
  double mean_revenue = 0.0;
  double depeg_frequency = 0.0;
  std::string mean_responsiveness_days;
};

std::vector<ReplicaRow> read_replicas_csv(const std::filesystem::path& file);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& file);

std::string format_real(double v);

}  // namespace reserve
