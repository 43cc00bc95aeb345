#pragma once

#include <Eigen/Dense>
#include <span>
#include <variant>
#include <vector>

#include "copulasurv/data.hpp"

namespace copulasurv {

// Parametric Weibull margin: S(t|Z) = exp(-lambda exp(beta'Z) t^rho).
struct WeibullMargin {
  double lambda = 1.0;
  double rho = 1.0;
  std::vector<double> beta;

  double linear_predictor(std::span<const double> z) const;
  double log_survival(double t, std::span<const double> z) const;
  double log_density(double t, std::span<const double> z) const;
  // t with S(t|z) = u; used by the Marshall-Olkin sampler.
  double inverse_survival(double u, std::span<const double> z) const;
};

// Semiparametric Cox margin: beta plus the Breslow step-function baseline.
// The baseline extends right-constant beyond the last jump.
struct CoxMargin {
  std::vector<double> beta;
  std::vector<double> jump_times;       // distinct event times, ascending
  std::vector<double> cum_hazard_at;    // Lambda at each jump time (prefix sums)

  double cum_hazard(double t) const;
  double log_survival(double t, std::span<const double> z) const;
};

// Plug-in survival probability H_ij = exp(-exp(beta'Z) Lambda(X)) for a Cox
// margin, or exp(log_survival) for a Weibull margin. Always in (0, 1].
double plug_in_survival(const WeibullMargin& m, const Subject& s);
double plug_in_survival(const CoxMargin& m, const Subject& s);

// Stage-1 independence fit of the Weibull margin with the pieces the
// two-stage sandwich needs. `info` is the observed information (negative
// finite-difference Hessian of the independence log-likelihood, unscaled)
// on the natural (lambda, rho, beta) scale; `cluster_scores` are the
// per-cluster summed scores U*_{i,beta} at the optimum, same scale.
struct WeibullIndependenceFit {
  WeibullMargin margin;
  Eigen::MatrixXd info;                     // I*, unscaled
  std::vector<Eigen::VectorXd> cluster_scores;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;

  // Robust sandwich (I*)^-1 (sum_i U_i U_i') (I*)^-1, unscaled: its diagonal
  // is the squared SE of the stage-1 estimates.
  Eigen::MatrixXd sandwich() const;
};

WeibullIndependenceFit fit_weibull_independence(const Dataset& data);

CoxMargin fit_cox(const Dataset& data);

} // namespace copulasurv
