#include "reserve/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace reserve {

namespace {

using Json = nlohmann::json;

const std::vector<std::pair<const char*, double ExperimentConfig::*>>& real_fields() {
  static const std::vector<std::pair<const char*, double ExperimentConfig::*>> f = {
      {"window_hours", &ExperimentConfig::window_hours},
      {"horizon_days", &ExperimentConfig::horizon_days},
      {"substep_hours", &ExperimentConfig::substep_hours},
      {"lambda0_r", &ExperimentConfig::lambda0_r},
      {"lambda0_m", &ExperimentConfig::lambda0_m},
      {"kappa_r", &ExperimentConfig::kappa_r},
      {"kappa_m", &ExperimentConfig::kappa_m},
      {"theta_r", &ExperimentConfig::theta_r},
      {"theta_m", &ExperimentConfig::theta_m},
      {"mark_mean_r", &ExperimentConfig::mark_mean_r},
      {"mark_mean_m", &ExperimentConfig::mark_mean_m},
      {"zeta", &ExperimentConfig::zeta},
      {"eta", &ExperimentConfig::eta},
      {"gamma", &ExperimentConfig::gamma},
      {"s_out0", &ExperimentConfig::s_out0},
      {"r_liq0", &ExperimentConfig::r_liq0},
      {"r_bill0", &ExperimentConfig::r_bill0},
      {"r_cash_per_window", &ExperimentConfig::r_cash_per_window},
      {"r_bill_per_window", &ExperimentConfig::r_bill_per_window},
      {"rho_per_window", &ExperimentConfig::rho_per_window},
      {"c_peg", &ExperimentConfig::c_peg},
      {"c_fee", &ExperimentConfig::c_fee},
      {"lambda_omega", &ExperimentConfig::lambda_omega},
      {"rho_omega", &ExperimentConfig::rho_omega},
      {"omega_max_fraction", &ExperimentConfig::omega_max_fraction},
      {"delta_max", &ExperimentConfig::delta_max},
      {"sweep_tol", &ExperimentConfig::sweep_tol},
      {"sweep_damping", &ExperimentConfig::sweep_damping},
      {"smoothing_fraction", &ExperimentConfig::smoothing_fraction},
      {"band_height", &ExperimentConfig::band_height},
      {"explosion_limit", &ExperimentConfig::explosion_limit},
  };
  return f;
}

const std::vector<std::pair<const char*, int ExperimentConfig::*>>& int_fields() {
  static const std::vector<std::pair<const char*, int ExperimentConfig::*>> f = {
      {"replicas", &ExperimentConfig::replicas},
      {"mpc_horizon_windows", &ExperimentConfig::mpc_horizon_windows},
      {"sweep_max_iter", &ExperimentConfig::sweep_max_iter},
      {"divergence_run", &ExperimentConfig::divergence_run},
  };
  return f;
}

int whole_ratio(double a, double b, const char* what) {
  const double n = std::round(a / b);
  if (n < 1.0 || std::abs(n * b - a) > 1e-9 * a)
    throw ConfigError(std::string(what) + " must be a whole multiple");
  return static_cast<int>(n);
}

}  // namespace

int ExperimentConfig::windows() const {
  return whole_ratio(horizon_days * 24.0, window_hours, "horizon (hours) / window_hours");
}

int ExperimentConfig::substeps_per_window() const {
  return whole_ratio(window_hours, substep_hours, "window_hours / substep_hours");
}

void validate(const ExperimentConfig& c) {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(std::string("config: ") + msg);
  };
  for (const auto& [name, field] : real_fields())
    need(std::isfinite(c.*field), (std::string(name) + " must be finite").c_str());
  need(c.replicas >= 1, "replicas must be >= 1");
  need(!c.scenarios.empty(), "at least one scenario required");
  need(!c.policies.empty(), "at least one policy required");
  need(c.window_hours > 0.0, "window_hours must be > 0");
  need(c.substep_hours > 0.0, "substep_hours must be > 0");
  need(c.horizon_days > 0.0 && c.horizon_days <= kScenarioHorizonDays,
       "horizon_days must be in (0, 92]");
  (void)c.windows();
  (void)c.substeps_per_window();
  need(c.lambda0_r >= 0.0 && c.lambda0_m >= 0.0, "baseline intensities must be >= 0");
  need(c.kappa_r >= 0.0 && c.kappa_m >= 0.0, "kappa must be >= 0");
  need(c.theta_r > 0.0 && c.theta_m > 0.0, "theta must be > 0");
  need(c.kappa_r < c.theta_r && c.kappa_m < c.theta_m, "base streams must be subcritical");
  need(c.mark_mean_r > 0.0 && c.mark_mean_m > 0.0, "mark means must be > 0");
  need(c.zeta >= 0.0, "zeta must be >= 0");
  need(c.eta >= 0.0 && c.gamma >= 0.0, "eta and gamma must be >= 0");
  need(c.s_out0 > 0.0, "s_out0 must be > 0");
  need(c.r_liq0 >= 0.0 && c.r_bill0 >= 0.0, "initial reserves must be >= 0");
  // Full collateralisation at the start.
  need(c.r_liq0 + c.r_bill0 >= c.s_out0 * (1.0 - 1e-12), "reserves must cover s_out0");
  need(c.r_bill_per_window >= c.r_cash_per_window && c.r_cash_per_window >= 0.0,
       "rates must satisfy r_bill >= r_cash >= 0");
  need(c.rho_per_window > 0.0, "rho must be > 0");
  need(c.c_peg > 0.0 && c.c_fee > 0.0, "c_peg and c_fee must be > 0");
  need(c.lambda_omega >= 0.0, "lambda_omega must be >= 0");
  need(c.rho_omega > 0.0, "rho_omega must be > 0");
  need(c.omega_max_fraction > 0.0, "omega_max_fraction must be > 0");
  need(c.delta_max >= 0.0, "delta_max must be >= 0");
  need(c.mpc_horizon_windows >= 1, "mpc_horizon_windows must be >= 1");
  need(c.sweep_tol > 0.0, "sweep_tol must be > 0");
  need(c.sweep_max_iter >= 1, "sweep_max_iter must be >= 1");
  need(c.sweep_damping > 0.0 && c.sweep_damping <= 1.0, "sweep_damping must be in (0, 1]");
  need(c.divergence_run >= 1, "divergence_run must be >= 1");
  need(c.smoothing_fraction >= 0.0, "smoothing_fraction must be >= 0");
  need(c.band_height > 0.0, "band_height must be > 0");
  need(c.explosion_limit > 0.0, "explosion_limit must be > 0");
}

Json to_json(const ExperimentConfig& c) {
  Json j = Json::object();
  Json sc = Json::array();
  for (auto s : c.scenarios) sc.push_back(std::string(to_string(s)));
  Json po = Json::array();
  for (auto p : c.policies) po.push_back(std::string(to_string(p)));
  j["scenarios"] = sc;
  j["policies"] = po;
  j["master_seed"] = c.master_seed;
  j["output_dir"] = c.output_dir;
  for (const auto& [name, field] : real_fields()) j[name] = c.*field;
  for (const auto& [name, field] : int_fields()) j[name] = c.*field;
  j["omega_max_reference"] =
      c.omega_max_reference == OmegaMaxReference::initial ? "initial" : "current";
  j["shortfall_demand"] = c.shortfall_demand == ShortfallDemand::gross ? "gross" : "net";
  return j;
}

ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  ExperimentConfig c;
  std::set<std::string> known = {"scenarios", "policies", "master_seed", "output_dir",
                                 "omega_max_reference", "shortfall_demand"};
  try {
    for (const auto& [name, field] : real_fields()) {
      known.insert(name);
      if (j.contains(name)) c.*field = j.at(name).get<double>();
    }
    for (const auto& [name, field] : int_fields()) {
      known.insert(name);
      if (j.contains(name)) c.*field = j.at(name).get<int>();
    }
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("scenarios")) {
      c.scenarios.clear();
      for (const auto& s : j.at("scenarios")) c.scenarios.push_back(parse_scenario(s.get<std::string>()));
    }
    if (j.contains("policies")) {
      c.policies.clear();
      for (const auto& p : j.at("policies")) c.policies.push_back(parse_policy(p.get<std::string>()));
    }
    if (j.contains("omega_max_reference")) {
      const auto v = j.at("omega_max_reference").get<std::string>();
      if (v == "current") c.omega_max_reference = OmegaMaxReference::current;
      else if (v == "initial") c.omega_max_reference = OmegaMaxReference::initial;
      else throw ConfigError("config: omega_max_reference must be current or initial");
    }
    if (j.contains("shortfall_demand")) {
      const auto v = j.at("shortfall_demand").get<std::string>();
      if (v == "net") c.shortfall_demand = ShortfallDemand::net;
      else if (v == "gross") c.shortfall_demand = ShortfallDemand::gross;
      else throw ConfigError("config: shortfall_demand must be net or gross");
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw ConfigError("config: unknown key '" + item.key() + "'");
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace reserve
