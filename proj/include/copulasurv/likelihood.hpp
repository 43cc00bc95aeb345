#pragma once

#include <span>

#include "copulasurv/data.hpp"
#include "copulasurv/generators.hpp"
#include "copulasurv/margins.hpp"

namespace copulasurv {

// Per-cluster log-likelihood from precomputed marginal terms.
// `survival` holds S(x_ij|Z_ij) in (0,1]; `log_density` holds log f(x_ij|Z_ij)
// and is only read where status = 1 (pass zeros for the survival-only form
// used by the semiparametric second stage).
double cluster_loglik_terms(const GeneratorFamily& gen,
                            const CoefficientTable& table,
                            std::span<const double> survival,
                            std::span<const double> log_density,
                            std::span<const int> status,
                            const std::string& cluster_id = {});

double cluster_loglik(const GeneratorFamily& gen, const WeibullMargin& margin,
                      const Cluster& cluster, const CoefficientTable& table);

// Sum over clusters in ascending id order, compensated summation.
double total_loglik(const GeneratorFamily& gen, const WeibullMargin& margin,
                    const Dataset& data, const CoefficientTable& table);

// Survival-only total log-likelihood at plug-in survival probabilities H_ij:
// one row per subject, clusters in ascending id order.
struct PluginTerms {
  std::vector<std::vector<double>> survival;   // per cluster, id order
  std::vector<std::vector<int>> status;
  int max_events = 0;
};

PluginTerms plugin_terms(const CoxMargin& margin, const Dataset& data);

double total_loglik_plugin(const GeneratorFamily& gen,
                           const PluginTerms& terms,
                           const CoefficientTable& table);

// Central finite-difference score dl/dtheta of the full parametric
// log-likelihood, step h = 1e-5 * max(1, |theta|), shrunk at domain edges.
double profile_score_theta(CopulaFamily family, const WeibullMargin& margin,
                           const Dataset& data, const CoefficientTable& table,
                           double theta);

} // namespace copulasurv
