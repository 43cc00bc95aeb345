#include "copulasurv/report.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

namespace copulasurv {

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

const char* se_method_name(FitReport::SeMethod m) {
  switch (m) {
    case FitReport::SeMethod::Hessian: return "hessian";
    case FitReport::SeMethod::Sandwich: return "sandwich";
    case FitReport::SeMethod::Jackknife: return "jackknife";
  }
  return "?";
}

} // namespace

nlohmann::json fit_report_json(const FitReport& report, CopulaFamily family,
                               const Dataset& data,
                               const nlohmann::json& resolved_config) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["method"] = method_name(report.method);
  j["copula"] = family_name(family);
  nlohmann::json est = nlohmann::json::object();
  for (const auto& [k, v] : report.estimates) est[k] = number_or_null(v);
  j["estimates"] = est;
  nlohmann::json se = nlohmann::json::object();
  for (const auto& [k, v] : report.standard_errors) se[k] = number_or_null(v);
  j["standard_errors"] = se;
  j["se_method"] = se_method_name(report.se_method);
  j["loglik"] = number_or_null(report.loglik);
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["n_clusters"] = data.n_clusters();
  j["n_subjects"] = data.n_subjects();
  j["events"] = data.n_events();
  j["warnings"] = report.warnings;
  j["resolved_config"] = resolved_config;
  return j;
}

nlohmann::json replication_json(const std::string& scenario_name,
                                const SimulationConfig& cfg,
                                const ReplicationOptions& opts,
                                const ReplicationSummary& summary) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["scenario"] = scenario_name;
  j["copula"] = family_name(cfg.family.kind);
  j["theta0"] = cfg.family.theta;
  j["n_clusters"] = cfg.n_clusters;
  j["size_min"] = cfg.size_min;
  j["size_max"] = cfg.size_max;
  j["censoring"] =
      cfg.censoring ? nlohmann::json{{"lambda_c", cfg.censoring->lambda_c},
                                     {"rho_c", cfg.censoring->rho_c}}
                    : nlohmann::json(nullptr);
  j["replicates"] = summary.replicates;
  j["seed"] = cfg.seed;
  j["jackknife_groups"] = opts.jackknife_groups;
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& [method, ms] : summary.methods) {
    nlohmann::json mj;
    mj["mean_estimate"] = number_or_null(ms.mean_estimate);
    mj["mean_se"] = number_or_null(ms.mean_se);
    mj["empirical_sd"] = number_or_null(ms.empirical_sd);
    mj["coverage"] = number_or_null(ms.coverage);
    mj["n_success"] = ms.n_success;
    mj["n_fail"] = ms.n_fail;
    methods[method_name(method)] = mj;
  }
  j["methods"] = methods;
  return j;
}

std::string replication_table(const nlohmann::json& cells) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %-10s %8s %14s %8s %10s\n",
                "scenario", "method", "mean", "(se;cov%)", "emp.sd", "ok/fail");
  out << line;
  auto row = [&](const nlohmann::json& cell) {
    const std::string scenario = cell.value("scenario", std::string("-"));
    for (const auto& [name, m] : cell.at("methods").items()) {
      char secov[32];
      if (m.at("mean_se").is_null()) {
        std::snprintf(secov, sizeof(secov), "(n/a)");
      } else {
        std::snprintf(secov, sizeof(secov), "(%.3f;%.0f%%)",
                      m.at("mean_se").get<double>(),
                      100.0 * m.at("coverage").get<double>());
      }
      char sd[16];
      if (m.at("empirical_sd").is_null())
        std::snprintf(sd, sizeof(sd), "n/a");
      else
        std::snprintf(sd, sizeof(sd), "%.4f", m.at("empirical_sd").get<double>());
      std::snprintf(line, sizeof(line), "%-28s %-10s %8.4f %14s %8s %6d/%d\n",
                    scenario.c_str(), name.c_str(),
                    m.at("mean_estimate").get<double>(), secov, sd,
                    m.at("n_success").get<int>(), m.at("n_fail").get<int>());
      out << line;
    }
  };
  if (cells.is_array()) {
    for (const auto& cell : cells) row(cell);
  } else {
    row(cells);
  }
  return out.str();
}

} // namespace copulasurv
