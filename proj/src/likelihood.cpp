#include "copulasurv/likelihood.hpp"

#include <cmath>
#include <sstream>

#include "copulasurv/errors.hpp"
#include "copulasurv/signed_log.hpp"

namespace copulasurv {

namespace {
constexpr double kSurvivalFloor = 1e-300;
}

double cluster_loglik_terms(const GeneratorFamily& gen,
                            const CoefficientTable& table,
                            std::span<const double> survival,
                            std::span<const double> log_density,
                            std::span<const int> status,
                            const std::string& cluster_id) {
  const std::size_t n = survival.size();
  int d = 0;
  double t_sum = 0.0;
  double ll = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = survival[j];
    if (!(s > kSurvivalFloor)) {
      std::ostringstream os;
      os << "marginal survival underflow at subject " << j;
      if (!cluster_id.empty()) os << " of cluster '" << cluster_id << "'";
      throw UnderflowError(os.str());
    }
    const double psi = phi_inv(gen, std::min(s, 1.0));
    t_sum += psi;
    if (status[j] == 1) {
      ++d;
      // delta_ij * [log f - log(-phi'(phi_inv(S)))]
      const SignedLogValue d1 = phi_deriv_k(gen, psi, 1, table);
      ll += log_density[j] - d1.log_magnitude;
    }
  }
  if (d > table.max_order()) {
    std::ostringstream os;
    os << "cluster event count " << d << " exceeds coefficient table order "
       << table.max_order();
    throw DomainError(os.str());
  }
  const SignedLogValue dk = phi_deriv_k(gen, t_sum, d, table);
  const int expected_sign = (d % 2 == 0) ? +1 : -1;
  if (dk.sign != expected_sign)
    throw NumericError("generator derivative sign violates complete "
                       "monotonicity; numerical corruption");
  return ll + dk.log_magnitude;
}

double cluster_loglik(const GeneratorFamily& gen, const WeibullMargin& margin,
                      const Cluster& cluster, const CoefficientTable& table) {
  const std::size_t n = cluster.subjects.size();
  std::vector<double> survival(n), log_density(n, 0.0);
  std::vector<int> status(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Subject& s = cluster.subjects[j];
    survival[j] = std::exp(margin.log_survival(s.time, s.covariates));
    status[j] = s.status;
    if (s.status == 1)
      log_density[j] = margin.log_density(s.time, s.covariates);
  }
  return cluster_loglik_terms(gen, table, survival, log_density, status,
                              cluster.id);
}

double total_loglik(const GeneratorFamily& gen, const WeibullMargin& margin,
                    const Dataset& data, const CoefficientTable& table) {
  KahanSum acc;
  for (int idx : data.cluster_order_by_id())
    acc.add(cluster_loglik(gen, margin, data.clusters[idx], table));
  return acc.value();
}

PluginTerms plugin_terms(const CoxMargin& margin, const Dataset& data) {
  PluginTerms out;
  for (int idx : data.cluster_order_by_id()) {
    const Cluster& c = data.clusters[idx];
    std::vector<double> surv(c.subjects.size());
    std::vector<int> status(c.subjects.size());
    for (std::size_t j = 0; j < c.subjects.size(); ++j) {
      surv[j] = plug_in_survival(margin, c.subjects[j]);
      status[j] = c.subjects[j].status;
    }
    out.max_events = std::max(out.max_events, c.event_count());
    out.survival.push_back(std::move(surv));
    out.status.push_back(std::move(status));
  }
  return out;
}

double total_loglik_plugin(const GeneratorFamily& gen,
                           const PluginTerms& terms,
                           const CoefficientTable& table) {
  KahanSum acc;
  std::vector<double> zeros;
  for (std::size_t i = 0; i < terms.survival.size(); ++i) {
    zeros.assign(terms.survival[i].size(), 0.0);
    acc.add(cluster_loglik_terms(gen, table, terms.survival[i], zeros,
                                 terms.status[i]));
  }
  return acc.value();
}

double profile_score_theta(CopulaFamily family, const WeibullMargin& margin,
                           const Dataset& data, const CoefficientTable& table,
                           double theta) {
  GeneratorFamily probe{family, theta};
  probe.validate();
  double h = 1e-5 * std::max(1.0, std::abs(theta));
  auto in_domain = [&](double t) {
    switch (family) {
      case CopulaFamily::GumbelHougaard: return t > 0.0 && t < 1.0;
      default: return t > 0.0;
    }
  };
  int shrink = 0;
  while ((!in_domain(theta - h) || !in_domain(theta + h)) && shrink < 40) {
    h *= 0.5;
    ++shrink;
  }
  if (!in_domain(theta - h) || !in_domain(theta + h))
    throw DomainError("theta too close to the family boundary for a "
                      "finite-difference score");
  // alpha tracks theta for Gumbel-Hougaard, so each probe point needs its
  // own coefficient table.
  auto eval = [&](double t) {
    const GeneratorFamily g{family, t};
    const CoefficientTable probe_table =
        pvf_coefficients(table.max_order(), pvf_params(g).alpha);
    return total_loglik(g, margin, data, probe_table);
  };
  return (eval(theta + h) - eval(theta - h)) / (2.0 * h);
}

} // namespace copulasurv
