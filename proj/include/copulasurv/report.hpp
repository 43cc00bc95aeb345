#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>

#include "copulasurv/data.hpp"
#include "copulasurv/estimators.hpp"
#include "copulasurv/simulation.hpp"

namespace copulasurv {

inline constexpr int kReportSchemaVersion = 1;

// JSON fit report: method, copula, estimates, standard_errors, loglik,
// converged, iterations, data counts, warnings, resolved_config.
nlohmann::json fit_report_json(const FitReport& report,
                               CopulaFamily family, const Dataset& data,
                               const nlohmann::json& resolved_config);

nlohmann::json replication_json(const std::string& scenario_name,
                                const SimulationConfig& cfg,
                                const ReplicationOptions& opts,
                                const ReplicationSummary& summary);

// Fixed-width rendering of the same per-method numbers the JSON carries.
std::string replication_table(const nlohmann::json& cells);

} // namespace copulasurv
