#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "reserve/config.hpp"
#include "reserve/harness.hpp"
#include "reserve/report.hpp"

using namespace reserve;

namespace {

int run_command(const std::string& config_path, const std::string& scenario,
                const std::string& policy, std::optional<int> replicas,
                std::optional<std::uint64_t> seed, const std::string& out, bool quiet) {
  ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
  if (scenario != "all") config.scenarios = {parse_scenario(scenario)};
  if (policy != "all") config.policies = {parse_policy(policy)};
  if (replicas) config.replicas = *replicas;
  if (seed) config.master_seed = *seed;
  if (!out.empty()) config.output_dir = out;
  validate(config);

  ProgressFn progress;
  if (!quiet) progress = [](const std::string& line) { std::cerr << line << '\n'; };
  const ExperimentReport report = run_experiment(config, progress);
  emit_reports(report, config.output_dir);

  std::printf("%-22s %-14s %5s %14s %8s %10s\n", "scenario", "policy", "n", "revenue", "depeg",
              "resp_days");
  for (const auto& c : report.cells) {
    const std::string resp =
        c.mean_responsiveness_days ? format_real(*c.mean_responsiveness_days).substr(0, 6) : "-";
    std::printf("%-22s %-14s %5d %14.4e %8.3f %10s\n", std::string(to_string(c.scenario)).c_str(),
                std::string(to_string(c.policy)).c_str(), c.completed, c.mean_revenue,
                c.depeg_frequency, resp.c_str());
  }
  for (const auto& f : report.failures)
    std::fprintf(stderr, "failed replica %s/%s/%d: %s\n",
                 std::string(to_string(f.scenario)).c_str(),
                 std::string(to_string(f.policy)).c_str(), f.replica, f.error.c_str());
  std::printf("reports written to %s\n", config.output_dir.c_str());
  return report.failures.empty() ? 0 : 1;
}

int oracle_command() {
  bool all = true;
  for (const auto& r : oracle::run_all()) {
    std::printf("%s  %s%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.empty() ? "" : "  ", r.detail.c_str());
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reserve management simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment and write reports");
  std::string config_path, scenario = "all", policy = "all", out;
  std::optional<int> replicas;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  run->add_option("--config", config_path, "Flat JSON config file")->check(CLI::ExistingFile);
  run->add_option("--scenario", scenario, "single_shock|prolonged_clustering|false_alarm|all");
  run->add_option("--policy", policy, "optimal|max_yield|max_liquidity|all");
  run->add_option("--replicas", replicas, "Replicas per cell")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--out", out, "Output directory");
  run->add_flag("--quiet", quiet, "No per-replica progress");

  app.add_subcommand("oracle", "Run brute-force and closed-form oracles");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return run_command(config_path, scenario, policy, replicas, seed, out, quiet);
    return oracle_command();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
