#include "reserve/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace reserve {

namespace fs = std::filesystem;

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

std::string_view status_name(StepStatus s) {
  switch (s) {
    case StepStatus::active: return "active";
    case StepStatus::depegged: return "depegged";
    case StepStatus::exhausted: return "exhausted";
  }
  return "unknown";
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw ReportError("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    if (!out_) throw ReportError("write failed: " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

std::vector<std::vector<std::string>> read_csv(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ReportError("cannot read " + file.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw ReportError("missing column " + name);
}

}  // namespace

std::vector<fs::path> emit_reports(const ExperimentReport& report, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;

  {
    const fs::path p = dir / "summary.csv";
    CsvWriter w(p, {"scenario", "policy", "replicas", "completed", "failed", "mean_revenue",
                    "mean_revenue_undiscounted", "depeg_frequency", "mean_responsiveness_days",
                    "responsive_count", "exhaustion_frequency", "mean_shortfall"});
    for (const auto& c : report.cells)
      w.row({std::string(to_string(c.scenario)), std::string(to_string(c.policy)),
             std::to_string(c.replicas), std::to_string(c.completed), std::to_string(c.failed),
             format_real(c.mean_revenue), format_real(c.mean_revenue_undiscounted),
             format_real(c.depeg_frequency), opt(c.mean_responsiveness_days),
             std::to_string(c.responsive_count), format_real(c.exhaustion_frequency),
             format_real(c.mean_shortfall)});
    written.push_back(p);
  }
  {
    const fs::path p = dir / "replicas.csv";
    CsvWriter w(p, {"scenario", "policy", "replica", "event_seed", "scenario_seed", "chi",
                    "revenue", "revenue_undiscounted", "carry", "peg_penalty", "fee_penalty",
                    "trading_penalty", "depegged", "depeg_time_hours", "exhaustion_time_hours",
                    "total_shortfall", "max_delta_p", "responsiveness_days",
                    "solver_nonconverged", "max_conservation_error", "max_balance_drift"});
    for (const auto& r : report.records)
      w.row({std::string(to_string(r.scenario)), std::string(to_string(r.policy)),
             std::to_string(r.replica), std::to_string(r.event_seed),
             std::to_string(r.scenario_seed), opt(r.chi), format_real(r.revenue.total),
             format_real(r.revenue_undiscounted), format_real(r.revenue.carry),
             format_real(r.revenue.peg), format_real(r.revenue.fee),
             format_real(r.revenue.trading), std::to_string(depeg_indicator(r)),
             opt(r.depeg_time), opt(r.exhaustion_time), format_real(r.total_shortfall),
             format_real(r.max_delta_p), opt(responsiveness_days(r, kShockOnsetDay)),
             std::to_string(r.solver_nonconverged), format_real(r.max_conservation_error),
             format_real(r.max_balance_drift)});
    written.push_back(p);
  }
  for (const auto& c : report.cells) {
    const fs::path p = dir / ("trajectory_" + std::string(to_string(c.scenario)) + "_" +
                              std::string(to_string(c.policy)) + ".csv");
    CsvWriter w(p, {"replica", "time_hours", "policy", "omega", "delta", "r_liq", "r_bill",
                    "delta_p", "lambda_R", "lambda_M", "s_out", "status"});
    for (const auto& r : report.records) {
      if (r.scenario != c.scenario || r.policy != c.policy) continue;
      for (const auto& wl : r.windows)
        w.row({std::to_string(r.replica), format_real(wl.t_start),
               std::string(to_string(r.policy)), format_real(wl.control.omega),
               format_real(wl.control.delta), format_real(wl.state.r_liq),
               format_real(wl.state.r_bill), format_real(wl.state.delta_p),
               format_real(wl.lambda_r), format_real(wl.lambda_m), format_real(wl.state.s_out),
               std::string(status_name(wl.status))});
    }
    written.push_back(p);
  }
  {
    using Json = nlohmann::ordered_json;
    Json m;
    m["version"] = RESERVE_VERSION;
    m["config"] = Json::parse(to_json(report.config).dump());
    Json seeds = Json::array();
    for (const auto& r : report.records) {
      Json s;
      s["scenario"] = std::string(to_string(r.scenario));
      s["policy"] = std::string(to_string(r.policy));
      s["replica"] = r.replica;
      s["event_seed"] = r.event_seed;
      s["scenario_seed"] = r.scenario_seed;
      s["chi"] = r.chi ? Json(*r.chi) : Json(nullptr);
      seeds.push_back(s);
    }
    m["replicas"] = seeds;
    Json failures = Json::array();
    for (const auto& f : report.failures)
      failures.push_back({{"scenario", std::string(to_string(f.scenario))},
                          {"policy", std::string(to_string(f.policy))},
                          {"replica", f.replica},
                          {"error", f.error}});
    m["failures"] = failures;
    const fs::path p = dir / "manifest.json";
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ReportError("cannot write " + p.string());
    out << m.dump(2) << '\n';
    if (!out) throw ReportError("write failed: " + p.string());
    written.push_back(p);
  }
  return written;
}

std::vector<ReplicaRow> read_replicas_csv(const fs::path& file) {
  const auto rows = read_csv(file);
  if (rows.empty()) throw ReportError("empty file " + file.string());
  const auto& h = rows.front();
  const auto sc = column(h, "scenario"), po = column(h, "policy"), re = column(h, "replica"),
             rv = column(h, "revenue"), ru = column(h, "revenue_undiscounted"),
             dg = column(h, "depegged"), rs = column(h, "responsiveness_days");
  std::vector<ReplicaRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != h.size()) throw ReportError("ragged row in " + file.string());
    out.push_back({r[sc], r[po], std::stoi(r[re]), std::stod(r[rv]), std::stod(r[ru]),
                   std::stoi(r[dg]), r[rs]});
  }
  return out;
}

std::vector<SummaryRow> read_summary_csv(const fs::path& file) {
  const auto rows = read_csv(file);
  if (rows.empty()) throw ReportError("empty file " + file.string());
  const auto& h = rows.front();
  const auto sc = column(h, "scenario"), po = column(h, "policy"),
             co = column(h, "completed"), mr = column(h, "mean_revenue"),
             df = column(h, "depeg_frequency"), rs = column(h, "mean_responsiveness_days");
  std::vector<SummaryRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != h.size()) throw ReportError("ragged row in " + file.string());
    out.push_back({r[sc], r[po], std::stoi(r[co]), std::stod(r[mr]), std::stod(r[df]), r[rs]});
  }
  return out;
}

}  // namespace reserve
