#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "copulasurv/data.hpp"
#include "copulasurv/estimators.hpp"
#include "copulasurv/generators.hpp"
#include "copulasurv/margins.hpp"
#include "copulasurv/rng.hpp"

namespace copulasurv {

struct CensoringConfig {
  double lambda_c;
  double rho_c;
};

struct SimulationConfig {
  GeneratorFamily family{CopulaFamily::Clayton, 0.5};
  int n_clusters = 200;
  int size_min = 2;
  int size_max = 50;
  WeibullMargin margin{0.0316, 1.5, {3.0}};
  double covariate_prob = 0.5; // per-subject Bernoulli dichotomous Z
  std::optional<CensoringConfig> censoring;
  std::uint64_t seed = 0;
  int replicates = 100;

  void validate() const;
};

// One draw of the mixing variable W with E[exp(-tW)] = phi_theta(t):
// gamma(1/theta, theta) for Clayton, positive stable(theta) for
// Gumbel-Hougaard, inverse Gaussian(mean 1, variance theta).
double sample_mixing_variable(const GeneratorFamily& family, Rng& rng);

// Marshall-Olkin: W ~ G_theta, E_j iid Exp(1), U_j = phi(E_j/W),
// T_j = S^-1(U_j|Z_j), then independent Weibull censoring if configured.
Cluster sample_cluster(const SimulationConfig& cfg, const std::string& id,
                       int size, Rng& rng);

// Cluster sizes uniform on {size_min..size_max}; deterministic in
// (cfg.seed, replicate) regardless of thread count.
Dataset generate_dataset(const SimulationConfig& cfg, int replicate);

struct MethodSummary {
  double mean_estimate = 0.0;
  double mean_se = 0.0;
  double empirical_sd = 0.0; // NaN when fewer than 2 successes
  double coverage = 0.0;     // 95% Wald intervals containing theta0
  int n_success = 0;
  int n_fail = 0;
};

struct ReplicationSummary {
  std::map<FitReport::Method, MethodSummary> methods;
  int replicates = 0;
};

struct ReplicationOptions {
  std::vector<FitReport::Method> methods{
      FitReport::Method::OneStageParametric,
      FitReport::Method::TwoStageParametric,
      FitReport::Method::TwoStageSemiparametric};
  int parallelism = 1;
  int jackknife_groups = 50; // grouping for semiparametric SEs
};

ReplicationSummary run_replication(const SimulationConfig& cfg,
                                   const ReplicationOptions& opts);

} // namespace copulasurv
