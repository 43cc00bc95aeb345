#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "copulasurv/data.hpp"
#include "copulasurv/generators.hpp"
#include "copulasurv/likelihood.hpp"
#include "copulasurv/margins.hpp"

namespace copulasurv {

struct FitReport {
  enum class Method {
    OneStageParametric,
    TwoStageParametric,
    TwoStageSemiparametric,
  };
  enum class SeMethod { Hessian, Sandwich, Jackknife };

  Method method;
  std::map<std::string, double> estimates;       // lambda, rho, beta:<name>, theta
  std::map<std::string, double> standard_errors;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  SeMethod se_method = SeMethod::Hessian;
  std::vector<std::string> warnings;
};

const char* method_name(FitReport::Method m);

// Information blocks of the full (beta, theta) log-likelihood.
struct InformationBlocks {
  Eigen::MatrixXd I_bb;
  Eigen::VectorXd I_bt;
  double I_tt = 0.0;
};

// Variance formula for the one-stage theta estimate:
//   Var = 1/I_tt + I_tb (I^-1)_bb I_bt / I_tt^2,
// with (I^-1)_bb the beta block of the inverse of the full information.
// Equals the (theta,theta) element of the full inverse information.
double one_stage_variance(const InformationBlocks& blocks);

// Variance formula for the two-stage theta estimate:
//   Var = 1/I_tt + I_tb sandwich I_bt / I_tt^2,
// where sandwich = (I*)^-1 V (I*)^-1 is the stage-1 robust variance.
double two_stage_variance(double I_tt, const Eigen::VectorXd& I_bt,
                          const Eigen::MatrixXd& sandwich);

// Grouped jackknife: clusters (in id order) are split into g contiguous
// groups; `refit` maps a deleted-group dataset to the scalar of interest.
// Failed refits are dropped with a warning when under 5% of groups,
// otherwise the whole computation errors.
double grouped_jackknife_se(
    const std::function<double(const Dataset&)>& refit, const Dataset& data,
    int g, std::vector<std::string>* warnings = nullptr);

FitReport fit_one_stage(
    CopulaFamily family, const Dataset& data,
    const std::optional<std::map<std::string, double>>& init = std::nullopt);

FitReport fit_two_stage_parametric(CopulaFamily family, const Dataset& data);

// Jackknife refits rerun both stages (Cox margin + theta) on the reduced
// data. `jackknife_groups` defaults to leave-one-cluster-out (g = K).
// `threads` bounds jackknife parallelism.
FitReport fit_two_stage_semiparametric(
    CopulaFamily family, const Dataset& data,
    std::optional<int> jackknife_groups = std::nullopt, int threads = 1);

// Natural <-> unconstrained theta transforms: log for Clayton and inverse
// Gaussian, logit for Gumbel-Hougaard.
double theta_to_working(CopulaFamily family, double theta);
double theta_from_working(CopulaFamily family, double w);

// Default stage-2 search grid, 8 log/logit-spaced points in theta.
std::vector<double> theta_grid(CopulaFamily family);

} // namespace copulasurv
