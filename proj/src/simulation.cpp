#include "copulasurv/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "copulasurv/errors.hpp"
#include "copulasurv/parallel.hpp"

namespace copulasurv {

void SimulationConfig::validate() const {
  family.validate();
  if (n_clusters < 1) throw DomainError("simulation needs n_clusters >= 1");
  if (size_min < 1 || size_min > size_max)
    throw DomainError("simulation needs 1 <= size_min <= size_max");
  if (!(margin.lambda > 0.0) || !(margin.rho > 0.0))
    throw DomainError("simulation margin needs lambda > 0 and rho > 0");
  if (!(covariate_prob >= 0.0) || !(covariate_prob <= 1.0))
    throw DomainError("covariate probability must be in [0, 1]");
  if (censoring && (!(censoring->lambda_c > 0.0) || !(censoring->rho_c > 0.0)))
    throw DomainError("censoring parameters must be positive");
  if (replicates < 1) throw DomainError("simulation needs replicates >= 1");
}

double sample_mixing_variable(const GeneratorFamily& family, Rng& rng) {
  family.validate();
  switch (family.kind) {
    case CopulaFamily::Clayton:
      return rng.gamma(1.0 / family.theta, family.theta);
    case CopulaFamily::GumbelHougaard:
      return rng.positive_stable(family.theta);
    case CopulaFamily::InverseGaussian:
      return rng.inverse_gaussian(family.theta);
  }
  throw DomainError("unknown copula family");
}

Cluster sample_cluster(const SimulationConfig& cfg, const std::string& id,
                       int size, Rng& rng) {
  Cluster cluster;
  cluster.id = id;
  cluster.subjects.reserve(size);
  const double w = sample_mixing_variable(cfg.family, rng);
  const int p = static_cast<int>(cfg.margin.beta.size());
  for (int j = 0; j < size; ++j) {
    Subject s;
    s.covariates.resize(p);
    for (int m = 0; m < p; ++m)
      s.covariates[m] = rng.bernoulli(cfg.covariate_prob);
    const double e = rng.exponential();
    const double u = phi(cfg.family, e / w);
    const double t = cfg.margin.inverse_survival(u, s.covariates);
    if (cfg.censoring) {
      const double c = std::pow(-std::log(rng.uniform()) / cfg.censoring->lambda_c,
                                1.0 / cfg.censoring->rho_c);
      s.time = std::min(t, c);
      s.status = t <= c ? 1 : 0;
    } else {
      s.time = t;
      s.status = 1;
    }
    cluster.subjects.push_back(std::move(s));
  }
  return cluster;
}

Dataset generate_dataset(const SimulationConfig& cfg, int replicate) {
  cfg.validate();
  Dataset data;
  const int p = static_cast<int>(cfg.margin.beta.size());
  for (int m = 0; m < p; ++m)
    data.covariate_names.push_back("z" + std::to_string(m + 1));
  data.clusters.reserve(cfg.n_clusters);
  char id_buf[16];
  for (int i = 0; i < cfg.n_clusters; ++i) {
    Rng rng(derive_stream_key(cfg.seed, static_cast<std::uint64_t>(replicate),
                              static_cast<std::uint64_t>(i)));
    const int size = rng.uniform_int(cfg.size_min, cfg.size_max);
    std::snprintf(id_buf, sizeof(id_buf), "c%06d", i + 1);
    data.clusters.push_back(sample_cluster(cfg, id_buf, size, rng));
  }
  return data;
}

namespace {

struct ReplicateOutcome {
  // estimate/SE per method, in opts.methods order; NaN marks a failure
  std::vector<double> estimate;
  std::vector<double> se;
  std::vector<bool> ok;
};

} // namespace

ReplicationSummary run_replication(const SimulationConfig& cfg,
                                   const ReplicationOptions& opts) {
  cfg.validate();
  if (opts.methods.empty())
    throw DomainError("run_replication needs at least one method");
  const int r_total = cfg.replicates;
  const int n_methods = static_cast<int>(opts.methods.size());
  std::vector<ReplicateOutcome> outcomes(r_total);

  parallel_for(r_total, opts.parallelism, [&](int r) {
    const Dataset data = generate_dataset(cfg, r);
    ReplicateOutcome out;
    out.estimate.assign(n_methods, std::numeric_limits<double>::quiet_NaN());
    out.se.assign(n_methods, std::numeric_limits<double>::quiet_NaN());
    out.ok.assign(n_methods, false);
    for (int m = 0; m < n_methods; ++m) {
      try {
        FitReport report;
        switch (opts.methods[m]) {
          case FitReport::Method::OneStageParametric:
            report = fit_one_stage(cfg.family.kind, data);
            break;
          case FitReport::Method::TwoStageParametric:
            report = fit_two_stage_parametric(cfg.family.kind, data);
            break;
          case FitReport::Method::TwoStageSemiparametric:
            report = fit_two_stage_semiparametric(cfg.family.kind, data,
                                                  opts.jackknife_groups);
            break;
        }
        out.estimate[m] = report.estimates.at("theta");
        out.se[m] = report.standard_errors.at("theta");
        out.ok[m] = report.converged && std::isfinite(out.estimate[m]) &&
                    std::isfinite(out.se[m]);
      } catch (const Error&) {
        // counted below; a replicate failure is not fatal
      }
    }
    outcomes[r] = std::move(out);
  });

  ReplicationSummary summary;
  summary.replicates = r_total;
  for (int m = 0; m < n_methods; ++m) {
    MethodSummary ms;
    double sum = 0.0, sum_se = 0.0;
    int covered = 0;
    std::vector<double> estimates;
    for (int r = 0; r < r_total; ++r) {
      if (!outcomes[r].ok[m]) {
        ++ms.n_fail;
        continue;
      }
      ++ms.n_success;
      const double est = outcomes[r].estimate[m];
      const double se = outcomes[r].se[m];
      sum += est;
      sum_se += se;
      estimates.push_back(est);
      if (std::abs(est - cfg.family.theta) <= 1.96 * se) ++covered;
    }
    if (ms.n_fail * 10 > r_total) {
      std::ostringstream os;
      os << method_name(opts.methods[m]) << ": " << ms.n_fail << " of "
         << r_total << " replicates failed (> 10%)";
      throw ConvergenceError(os.str());
    }
    if (ms.n_success > 0) {
      ms.mean_estimate = sum / ms.n_success;
      ms.mean_se = sum_se / ms.n_success;
      ms.coverage = static_cast<double>(covered) / ms.n_success;
    }
    if (ms.n_success >= 2) {
      double ss = 0.0;
      for (double e : estimates) {
        const double d = e - ms.mean_estimate;
        ss += d * d;
      }
      ms.empirical_sd = std::sqrt(ss / (ms.n_success - 1));
    } else {
      ms.empirical_sd = std::numeric_limits<double>::quiet_NaN();
    }
    summary.methods[opts.methods[m]] = ms;
  }
  return summary;
}

} // namespace copulasurv
