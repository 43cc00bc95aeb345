#include "copulasurv/optim.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "copulasurv/errors.hpp"

namespace copulasurv {

namespace {
double rel_step(double x, double rel) { return rel * std::max(1.0, std::abs(x)); }
}

double fd_derivative(const ScalarFn& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

Eigen::VectorXd fd_gradient(const VectorFn& f, const Eigen::VectorXd& x,
                            double rel) {
  const auto n = x.size();
  Eigen::VectorXd g(n);
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = rel_step(x[i], rel);
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const VectorFn& f, const Eigen::VectorXd& x,
                           double rel) {
  const auto n = x.size();
  Eigen::MatrixXd h_mat(n, n);
  std::vector<double> h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = rel_step(x[i], rel);
  const double f0 = f(x);
  Eigen::VectorXd xt = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xt[i] = x[i] + h[i];
    const double fp = f(xt);
    xt[i] = x[i] - h[i];
    const double fm = f(xt);
    xt[i] = x[i];
    h_mat(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      xt[i] = x[i] + h[i];
      xt[j] = x[j] + h[j];
      const double fpp = f(xt);
      xt[j] = x[j] - h[j];
      const double fpm = f(xt);
      xt[i] = x[i] - h[i];
      const double fmm = f(xt);
      xt[j] = x[j] + h[j];
      const double fmp = f(xt);
      xt[i] = x[i];
      xt[j] = x[j];
      h_mat(i, j) = h_mat(j, i) =
          (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  return h_mat;
}

OptimResult maximize_bfgs(const VectorFn& f, const GradientFn& grad,
                          const Eigen::VectorXd& x0, const OptimOptions& opts) {
  const auto n = x0.size();
  auto gradient = [&](const Eigen::VectorXd& x) {
    return grad ? grad(x) : fd_gradient(f, x, opts.fd_rel_step);
  };

  Eigen::VectorXd x = x0;
  double fx = f(x);
  Eigen::VectorXd g = gradient(x);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  int iter = 0;
  bool small_step = false;

  for (; iter < opts.max_iterations; ++iter) {
    if (g.norm() <= opts.grad_tol) break;
    Eigen::VectorXd dir = h_inv * g;
    if (dir.dot(g) <= 0.0) dir = g; // reset on a non-ascent direction

    // backtracking Armijo line search
    double step = 1.0;
    const double slope = g.dot(dir);
    double f_new = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new >= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd g_new = gradient(x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g - g_new; // gradient of -f increases along s
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      const Eigen::MatrixXd v = eye - (s * y.transpose()) / sy;
      h_inv = v * h_inv * v.transpose() + (s * s.transpose()) / sy;
    }
    small_step = s.norm() < opts.step_tol;
    x = x_new;
    fx = f_new;
    g = g_new;
    if (small_step && g.norm() <= opts.grad_tol) break;
  }

  // Newton polish on the finite-difference Hessian; drives the score norm
  // to its numerical floor near a proper maximum.
  for (int polish = 0; polish < 20 && g.norm() > opts.grad_tol; ++polish) {
    Eigen::MatrixXd hess = fd_hessian(f, x, opts.fd_rel_step);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-hess);
    if (ldlt.info() != Eigen::Success) break;
    Eigen::VectorXd dir = ldlt.solve(g);
    if (!dir.allFinite()) break;
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      const Eigen::VectorXd x_new = x + step * dir;
      const double f_new = f(x_new);
      if (std::isfinite(f_new) && f_new >= fx - 1e-12 * std::abs(fx)) {
        x = x_new;
        fx = f_new;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    g = gradient(x);
    ++iter;
  }

  OptimResult res;
  res.x = x;
  res.value = fx;
  res.iterations = iter;
  res.grad_norm = g.norm();
  res.converged = g.norm() <= opts.grad_tol || small_step;
  return res;
}

OptimResult maximize_scalar(const ScalarFn& f,
                            const std::vector<double>& grid_points,
                            double tol) {
  if (grid_points.size() < 2)
    throw DomainError("maximize_scalar needs at least two grid points");

  std::size_t best = 0;
  std::vector<double> values(grid_points.size());
  for (std::size_t i = 0; i < grid_points.size(); ++i) {
    values[i] = f(grid_points[i]);
    if (values[i] > values[best]) best = i;
  }
  double a = grid_points[best == 0 ? 0 : best - 1];
  double b = grid_points[best + 1 < grid_points.size() ? best + 1 : best];

  // Expand outward when the grid maximum sits on an edge.
  const double span = grid_points.back() - grid_points.front();
  if (best == 0) a = grid_points.front() - 0.5 * span;
  if (best + 1 == grid_points.size()) b = grid_points.back() + 0.5 * span;

  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  int iter = 0;
  while (b - a > tol && iter < 500) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
    ++iter;
  }

  OptimResult res;
  const double xm = 0.5 * (a + b);
  res.x = Eigen::VectorXd::Constant(1, xm);
  res.value = f(xm);
  res.iterations = iter;
  res.converged = b - a <= tol;
  return res;
}

} // namespace copulasurv
