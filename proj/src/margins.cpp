#include "copulasurv/margins.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "copulasurv/errors.hpp"
#include "copulasurv/optim.hpp"
#include "copulasurv/signed_log.hpp"

namespace copulasurv {

double WeibullMargin::linear_predictor(std::span<const double> z) const {
  if (z.size() != beta.size())
    throw DomainError("covariate dimension does not match beta");
  double lp = 0.0;
  for (std::size_t m = 0; m < beta.size(); ++m) lp += beta[m] * z[m];
  return lp;
}

double WeibullMargin::log_survival(double t, std::span<const double> z) const {
  if (!(t > 0.0)) throw DomainError("weibull_log_survival requires t > 0");
  return -lambda * std::exp(linear_predictor(z)) * std::pow(t, rho);
}

double WeibullMargin::log_density(double t, std::span<const double> z) const {
  if (!(t > 0.0)) throw DomainError("weibull_log_density requires t > 0");
  return std::log(lambda * rho) + linear_predictor(z) +
         (rho - 1.0) * std::log(t) + log_survival(t, z);
}

double WeibullMargin::inverse_survival(double u,
                                       std::span<const double> z) const {
  if (!(u > 0.0) || !(u <= 1.0))
    throw DomainError("inverse_survival requires u in (0, 1]");
  return std::pow(-std::log(u) / (lambda * std::exp(linear_predictor(z))),
                  1.0 / rho);
}

double CoxMargin::cum_hazard(double t) const {
  auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  if (it == jump_times.begin()) return 0.0;
  return cum_hazard_at[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

double CoxMargin::log_survival(double t, std::span<const double> z) const {
  if (z.size() != beta.size())
    throw DomainError("covariate dimension does not match beta");
  double lp = 0.0;
  for (std::size_t m = 0; m < beta.size(); ++m) lp += beta[m] * z[m];
  return -std::exp(lp) * cum_hazard(t);
}

double plug_in_survival(const WeibullMargin& m, const Subject& s) {
  return std::exp(m.log_survival(s.time, s.covariates));
}

double plug_in_survival(const CoxMargin& m, const Subject& s) {
  return std::exp(m.log_survival(s.time, s.covariates));
}

Eigen::MatrixXd WeibullIndependenceFit::sandwich() const {
  const auto n = info.rows();
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(n, n);
  for (const auto& u : cluster_scores) outer += u * u.transpose();
  const Eigen::MatrixXd info_inv = info.inverse();
  return info_inv * outer * info_inv;
}

namespace {

// Independence Weibull log-likelihood and its analytic gradient on the
// working scale x = (log lambda, log rho, beta...).
double weibull_indep_loglik(const Dataset& data, const Eigen::VectorXd& x,
                            Eigen::VectorXd* grad) {
  const int p = data.covariate_count();
  const double log_lambda = x[0];
  const double rho = std::exp(x[1]);
  if (grad) grad->setZero();
  KahanSum ll;
  for (const auto& c : data.clusters) {
    for (const auto& s : c.subjects) {
      double lp = 0.0;
      for (int m = 0; m < p; ++m) lp += x[2 + m] * s.covariates[m];
      const double log_t = std::log(s.time);
      const double w = std::exp(log_lambda + lp + rho * log_t);
      ll.add(s.status * (log_lambda + x[1] + lp + (rho - 1.0) * log_t) - w);
      if (grad) {
        (*grad)[0] += s.status - w;
        (*grad)[1] += (s.status * (1.0 / rho + log_t) - w * log_t) * rho;
        for (int m = 0; m < p; ++m)
          (*grad)[2 + m] += (s.status - w) * s.covariates[m];
      }
    }
  }
  return ll.value();
}

} // namespace

WeibullIndependenceFit fit_weibull_independence(const Dataset& data) {
  data.validate();
  if (data.n_events() == 0)
    throw IdentifiabilityError(
        "independence Weibull fit: dataset has no events");
  const int p = data.covariate_count();
  const int dim = 2 + p;

  // moment-style start: exponential rate = events / total time
  double total_time = 0.0;
  for (const auto& c : data.clusters)
    for (const auto& s : c.subjects) total_time += s.time;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
  x0[0] = std::log(data.n_events() / total_time);

  auto f = [&](const Eigen::VectorXd& x) {
    return weibull_indep_loglik(data, x, nullptr);
  };
  auto grad = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(dim);
    weibull_indep_loglik(data, x, &g);
    return g;
  };
  const OptimResult opt = maximize_bfgs(f, grad, x0);
  if (!opt.converged) {
    std::ostringstream os;
    os << "independence Weibull fit did not converge after " << opt.iterations
       << " iterations (score norm " << opt.grad_norm << ")";
    throw ConvergenceError(os.str());
  }

  WeibullIndependenceFit out;
  out.margin.lambda = std::exp(opt.x[0]);
  out.margin.rho = std::exp(opt.x[1]);
  out.margin.beta.assign(p, 0.0);
  for (int m = 0; m < p; ++m) out.margin.beta[m] = opt.x[2 + m];
  out.loglik = opt.value;
  out.converged = true;
  out.iterations = opt.iterations;

  // Per-cluster scores on the natural (lambda, rho, beta) scale.
  const double lambda = out.margin.lambda, rho = out.margin.rho;
  out.cluster_scores.reserve(data.clusters.size());
  for (const auto& c : data.clusters) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(dim);
    for (const auto& s : c.subjects) {
      const double lp = out.margin.linear_predictor(s.covariates);
      const double log_t = std::log(s.time);
      const double w = lambda * std::exp(lp + rho * log_t); // = Lambda(t|z)
      u[0] += s.status / lambda - w / lambda;
      u[1] += s.status * (1.0 / rho + log_t) - w * log_t;
      for (int m = 0; m < p; ++m)
        u[2 + m] += (s.status - w) * s.covariates[m];
    }
    out.cluster_scores.push_back(std::move(u));
  }

  // Observed information: finite-difference Hessian on the natural scale.
  auto f_natural = [&](const Eigen::VectorXd& nat) {
    Eigen::VectorXd xt(dim);
    xt[0] = std::log(nat[0]);
    xt[1] = std::log(nat[1]);
    for (int m = 0; m < p; ++m) xt[2 + m] = nat[2 + m];
    return weibull_indep_loglik(data, xt, nullptr);
  };
  Eigen::VectorXd natural(dim);
  natural[0] = lambda;
  natural[1] = rho;
  for (int m = 0; m < p; ++m) natural[2 + m] = out.margin.beta[m];
  out.info = -fd_hessian(f_natural, natural);
  return out;
}

namespace {

struct CoxWork {
  // subject indices sorted by descending time, flattened over clusters
  std::vector<const Subject*> by_time_desc;
};

// Breslow partial log-likelihood, score and information at beta.
double cox_partial(const CoxWork& w, const Eigen::VectorXd& beta,
                   Eigen::VectorXd* grad, Eigen::MatrixXd* info) {
  const int p = static_cast<int>(beta.size());
  double ll = 0.0;
  if (grad) grad->setZero();
  if (info) info->setZero();
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);

  std::size_t i = 0;
  const auto n = w.by_time_desc.size();
  while (i < n) {
    const double t = w.by_time_desc[i]->time;
    // enter everyone with this time into the risk set, then process events
    std::size_t j = i;
    while (j < n && w.by_time_desc[j]->time == t) {
      const Subject* s = w.by_time_desc[j];
      double lp = 0.0;
      for (int m = 0; m < p; ++m) lp += beta[m] * s->covariates[m];
      const double e = std::exp(lp);
      s0 += e;
      for (int m = 0; m < p; ++m) {
        s1[m] += e * s->covariates[m];
        for (int l = 0; l < p; ++l)
          s2(m, l) += e * s->covariates[m] * s->covariates[l];
      }
      ++j;
    }
    int d_t = 0;
    Eigen::VectorXd z_sum = Eigen::VectorXd::Zero(p);
    for (std::size_t k = i; k < j; ++k) {
      const Subject* s = w.by_time_desc[k];
      if (s->status == 1) {
        ++d_t;
        for (int m = 0; m < p; ++m) z_sum[m] += s->covariates[m];
      }
    }
    if (d_t > 0) {
      double lp_events = 0.0;
      for (int m = 0; m < p; ++m) lp_events += beta[m] * z_sum[m];
      ll += lp_events - d_t * std::log(s0);
      if (grad) *grad += z_sum - d_t * s1 / s0;
      if (info) {
        const Eigen::VectorXd e_bar = s1 / s0;
        *info += d_t * (s2 / s0 - e_bar * e_bar.transpose());
      }
    }
    i = j;
  }
  return ll;
}

} // namespace

CoxMargin fit_cox(const Dataset& data) {
  data.validate();
  if (data.n_events() == 0)
    throw IdentifiabilityError("Cox fit: dataset has no events");
  const int p = data.covariate_count();

  CoxWork w;
  for (const auto& c : data.clusters)
    for (const auto& s : c.subjects) w.by_time_desc.push_back(&s);
  std::sort(w.by_time_desc.begin(), w.by_time_desc.end(),
            [](const Subject* a, const Subject* b) { return a->time > b->time; });

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (p > 0) {
    double ll = cox_partial(w, beta, nullptr, nullptr);
    bool converged = false;
    int iter = 0;
    for (; iter < 200; ++iter) {
      Eigen::VectorXd g(p);
      Eigen::MatrixXd h(p, p);
      cox_partial(w, beta, &g, &h);
      if (g.norm() <= 1e-6) {
        converged = true;
        break;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      if (ldlt.info() != Eigen::Success)
        throw NumericError("Cox fit: singular information matrix");
      Eigen::VectorXd dir = ldlt.solve(g);
      double step = 1.0;
      Eigen::VectorXd beta_new;
      double ll_new = ll;
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls) {
        beta_new = beta + step * dir;
        ll_new = cox_partial(w, beta_new, nullptr, nullptr);
        if (std::isfinite(ll_new) && ll_new >= ll - 1e-12 * std::abs(ll)) {
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      const double change = (beta_new - beta).norm();
      beta = beta_new;
      ll = ll_new;
      if (beta.lpNorm<Eigen::Infinity>() > 40.0)
        throw DivergenceError(
            "Cox fit: monotone partial likelihood (separation)");
      if (change < 1e-8) {
        Eigen::VectorXd g2(p);
        cox_partial(w, beta, &g2, nullptr);
        converged = g2.norm() <= 1e-6;
        break;
      }
    }
    if (!converged) {
      Eigen::VectorXd g(p);
      cox_partial(w, beta, &g, nullptr);
      if (g.norm() > 1e-6) {
        std::ostringstream os;
        os << "Cox fit did not converge after " << iter
           << " iterations (score norm " << g.norm() << ")";
        throw ConvergenceError(os.str());
      }
    }
  }

  // Breslow baseline: walk times ascending, one jump per distinct event time.
  CoxMargin out;
  out.beta.assign(p, 0.0);
  for (int m = 0; m < p; ++m) out.beta[m] = beta[m];

  std::vector<const Subject*> by_time_asc(w.by_time_desc.rbegin(),
                                          w.by_time_desc.rend());
  // risk-weighted denominator at time t = sum over X >= t of exp(beta'z)
  const std::size_t n = by_time_asc.size();
  std::vector<double> denom_from(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double lp = 0.0;
    for (int m = 0; m < p; ++m) lp += beta[m] * by_time_asc[i]->covariates[m];
    denom_from[i] = denom_from[i + 1] + std::exp(lp);
  }
  double cum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    const double t = by_time_asc[i]->time;
    std::size_t j = i;
    int d_t = 0;
    while (j < n && by_time_asc[j]->time == t) {
      d_t += by_time_asc[j]->status;
      ++j;
    }
    if (d_t > 0) {
      cum += d_t / denom_from[i];
      out.jump_times.push_back(t);
      out.cum_hazard_at.push_back(cum);
    }
    i = j;
  }
  return out;
}

} // namespace copulasurv
