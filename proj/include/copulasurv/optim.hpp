#pragma once

#include <Eigen/Dense>
#include <functional>

namespace copulasurv {

using ScalarFn = std::function<double(double)>;
using VectorFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Central finite differences with relative steps h_i = rel * max(1, |x_i|).
Eigen::VectorXd fd_gradient(const VectorFn& f, const Eigen::VectorXd& x,
                            double rel = 1e-5);
Eigen::MatrixXd fd_hessian(const VectorFn& f, const Eigen::VectorXd& x,
                           double rel = 1e-5);
double fd_derivative(const ScalarFn& f, double x, double h);

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;        // objective at x (the maximized function)
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
};

struct OptimOptions {
  int max_iterations = 200;
  double step_tol = 1e-8;    // parameter-change tolerance
  double grad_tol = 1e-6;    // score-norm tolerance
  double fd_rel_step = 1e-5;
};

// Maximize f by BFGS; `grad` may be empty, then finite differences are used.
// Finishes with Newton polishing on the finite-difference Hessian so the
// score norm reaches the tolerance when the surface allows it.
OptimResult maximize_bfgs(const VectorFn& f, const GradientFn& grad,
                          const Eigen::VectorXd& x0,
                          const OptimOptions& opts = {});

// Maximize a scalar function: coarse grid over `grid_points`, then
// golden-section refinement on the bracketing interval.
OptimResult maximize_scalar(const ScalarFn& f,
                            const std::vector<double>& grid_points,
                            double tol = 1e-10);

} // namespace copulasurv
