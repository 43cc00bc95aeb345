#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "copulasurv/errors.hpp"
#include "copulasurv/likelihood.hpp"
#include "test_oracles.hpp"

using namespace copulasurv;

namespace {

Dataset random_dataset(const GeneratorFamily& gen, const WeibullMargin& margin,
                       int n_clusters, int max_size, unsigned seed,
                       double censor_frac = 0.3) {
  // Not the library sampler: independent uniforms pushed through the
  // Archimedean conditional via rejection-free mixture draws done with
  // std::mt19937, good enough to exercise likelihood code paths.
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(1e-9, 1.0);
  std::uniform_int_distribution<int> size_d(1, max_size);
  Dataset data;
  data.covariate_names = {"z"};
  for (int i = 0; i < n_clusters; ++i) {
    Cluster c;
    char id[16];
    std::snprintf(id, sizeof(id), "c%05d", i);
    c.id = id;
    const int m = size_d(rng);
    for (int j = 0; j < m; ++j) {
      Subject s;
      s.covariates = {unif(rng) < 0.5 ? 0.0 : 1.0};
      s.time = margin.inverse_survival(unif(rng), s.covariates);
      s.status = unif(rng) < censor_frac ? 0 : 1;
      c.subjects.push_back(std::move(s));
    }
    data.clusters.push_back(std::move(c));
  }
  return data;
}

double joint_survival(const GeneratorFamily& gen, const WeibullMargin& m,
                      const std::vector<std::vector<double>>& z, double t1,
                      double t2) {
  return phi(gen, phi_inv(gen, std::exp(m.log_survival(t1, z[0]))) +
                      phi_inv(gen, std::exp(m.log_survival(t2, z[1]))));
}

} // namespace

TEST_CASE("size-1 cluster reduces exactly to the marginal terms") {
  const WeibullMargin m{0.5, 1.3, {0.7}};
  for (auto fam : {CopulaFamily::Clayton, CopulaFamily::GumbelHougaard,
                   CopulaFamily::InverseGaussian}) {
    const double theta = fam == CopulaFamily::GumbelHougaard ? 0.6 : 1.2;
    const GeneratorFamily gen{fam, theta};
    const CoefficientTable table = pvf_coefficients(4, pvf_params(gen).alpha);

    Cluster event{"a", {Subject{1.4, 1, {1.0}}}};
    CHECK(std::abs(cluster_loglik(gen, m, event, table) -
                   m.log_density(1.4, event.subjects[0].covariates)) <= 1e-12);

    Cluster cens{"b", {Subject{0.8, 0, {0.0}}}};
    CHECK(std::abs(cluster_loglik(gen, m, cens, table) -
                   m.log_survival(0.8, cens.subjects[0].covariates)) <= 1e-12);
  }
}

TEST_CASE("size-2 cluster matches finite differences of the joint survival") {
  const WeibullMargin m{0.5, 1.3, {0.7}};
  const std::vector<std::vector<double>> z = {{1.0}, {0.0}};
  const double t1 = 1.1, t2 = 0.6;

  for (auto fam : {CopulaFamily::Clayton, CopulaFamily::GumbelHougaard,
                   CopulaFamily::InverseGaussian}) {
    const double theta = fam == CopulaFamily::GumbelHougaard ? 0.6 : 1.2;
    const GeneratorFamily gen{fam, theta};
    const CoefficientTable table = pvf_coefficients(4, pvf_params(gen).alpha);
    const auto S = [&](double a, double b) {
      return joint_survival(gen, m, z, a, b);
    };

    // both censored: log S itself
    Cluster cc{"a", {Subject{t1, 0, z[0]}, Subject{t2, 0, z[1]}}};
    CHECK(cluster_loglik(gen, m, cc, table) ==
          doctest::Approx(std::log(S(t1, t2))).epsilon(1e-10));

    // event + censored: -dS/dt1
    const double h1 = 1e-5 * t1, h2 = 1e-5 * t2;
    Cluster ec{"a", {Subject{t1, 1, z[0]}, Subject{t2, 0, z[1]}}};
    const double d1 = -(S(t1 + h1, t2) - S(t1 - h1, t2)) / (2.0 * h1);
    CHECK(cluster_loglik(gen, m, ec, table) ==
          doctest::Approx(std::log(d1)).epsilon(1e-4));

    // both events: d2S/dt1 dt2 (positive)
    Cluster ee{"a", {Subject{t1, 1, z[0]}, Subject{t2, 1, z[1]}}};
    const double d12 = (S(t1 + h1, t2 + h2) - S(t1 + h1, t2 - h2) -
                        S(t1 - h1, t2 + h2) + S(t1 - h1, t2 - h2)) /
                       (4.0 * h1 * h2);
    CHECK(cluster_loglik(gen, m, ee, table) ==
          doctest::Approx(std::log(d12)).epsilon(1e-4));
  }
}

TEST_CASE("near-independence limit sums the marginal terms") {
  const GeneratorFamily gen{CopulaFamily::Clayton, 1e-8};
  const CoefficientTable table = pvf_coefficients(4, 0.0);
  const WeibullMargin m{0.5, 1.3, {0.7}};
  Cluster c{"a",
            {Subject{1.1, 1, {1.0}}, Subject{0.6, 0, {0.0}},
             Subject{2.3, 1, {1.0}}}};
  double indep = 0.0;
  for (const auto& s : c.subjects)
    indep += s.status ? m.log_density(s.time, s.covariates)
                      : m.log_survival(s.time, s.covariates);
  CHECK(cluster_loglik(gen, m, c, table) ==
        doctest::Approx(indep).epsilon(1e-6));
}

TEST_CASE("survival-only terms agree with zero-density marginal terms") {
  const GeneratorFamily gen{CopulaFamily::Clayton, 0.8};
  const CoefficientTable table = pvf_coefficients(6, 0.0);
  const std::vector<double> survival = {0.9, 0.4, 0.15};
  const std::vector<double> zeros = {0.0, 0.0, 0.0};
  const std::vector<int> status = {1, 0, 1};
  const double a = cluster_loglik_terms(gen, table, survival, zeros, status);
  // re-derive: the survival-only cluster term is
  //   sum_{delta=1} log(-phi'(psi(H))) ... with density factors dropped,
  // which is exactly what zero log-densities produce.
  CHECK(std::isfinite(a));

  // against a hand assembly from the generator primitives
  double arg = 0.0;
  for (double h : survival) arg += phi_inv(gen, h);
  double hand = phi_deriv_k(gen, arg, 2, table).log_magnitude;
  for (std::size_t j = 0; j < survival.size(); ++j)
    if (status[j]) {
      const double psi = phi_inv(gen, survival[j]);
      hand -= phi_deriv_k(gen, psi, 1, table).log_magnitude;
    }
  CHECK(a == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("plugin total equals per-cluster assembly") {
  const WeibullMargin m{0.5, 1.3, {0.7}};
  const GeneratorFamily gen{CopulaFamily::InverseGaussian, 0.9};
  Dataset data = random_dataset(gen, m, 40, 5, 21);
  const auto cox = fit_cox(data);
  const auto terms = plugin_terms(cox, data);
  const CoefficientTable table =
      pvf_coefficients(std::max(1, terms.max_events), pvf_params(gen).alpha);
  double hand = 0.0;
  for (std::size_t i = 0; i < terms.survival.size(); ++i) {
    std::vector<double> zeros(terms.survival[i].size(), 0.0);
    hand += cluster_loglik_terms(gen, table, terms.survival[i], zeros,
                                 terms.status[i]);
  }
  CHECK(total_loglik_plugin(gen, terms, table) ==
        doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("total log-likelihood is permutation invariant") {
  const WeibullMargin m{0.5, 1.3, {0.7}};
  const GeneratorFamily gen{CopulaFamily::GumbelHougaard, 0.55};
  Dataset data = random_dataset(gen, m, 60, 8, 42);
  const CoefficientTable table =
      pvf_coefficients(std::max(1, data.max_cluster_events()),
                       pvf_params(gen).alpha);
  const double before = total_loglik(gen, m, data, table);
  std::mt19937 rng(7);
  std::shuffle(data.clusters.begin(), data.clusters.end(), rng);
  CHECK(total_loglik(gen, m, data, table) == doctest::Approx(before));
  CHECK(std::abs(total_loglik(gen, m, data, table) - before) <= 1e-12);
}

TEST_CASE("vanishing survival probabilities raise UnderflowError") {
  const GeneratorFamily gen{CopulaFamily::Clayton, 0.8};
  const CoefficientTable table = pvf_coefficients(2, 0.0);
  const std::vector<double> survival = {0.5, 1e-310};
  const std::vector<double> dens = {0.0, 0.0};
  const std::vector<int> status = {0, 0};
  CHECK_THROWS_AS(cluster_loglik_terms(gen, table, survival, dens, status),
                  UnderflowError);
}

TEST_CASE("theta score matches an independent finite difference") {
  const WeibullMargin m{0.5, 1.3, {0.7}};
  Dataset data;
  for (auto fam : {CopulaFamily::Clayton, CopulaFamily::GumbelHougaard,
                   CopulaFamily::InverseGaussian}) {
    const double theta = fam == CopulaFamily::GumbelHougaard ? 0.5 : 1.0;
    const GeneratorFamily gen{fam, theta};
    data = random_dataset(gen, m, 30, 6, 13);
    const CoefficientTable table =
        pvf_coefficients(std::max(1, data.max_cluster_events()) + 2,
                         pvf_params(gen).alpha);
    const auto ll = [&](double th) {
      GeneratorFamily g{fam, th};
      const CoefficientTable t =
          pvf_coefficients(table.max_order(), pvf_params(g).alpha);
      return total_loglik(g, m, data, t);
    };
    const double fd = test_oracles::central_diff(ll, theta, 1e-4 * theta);
    CHECK(profile_score_theta(fam, m, data, table, theta) ==
          doctest::Approx(fd).epsilon(1e-3));
  }
}

TEST_CASE("large event-heavy cluster stays finite") {
  const GeneratorFamily gen{CopulaFamily::Clayton, 0.2};
  const CoefficientTable table = pvf_coefficients(174, 0.0);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unif(1e-4, 1.0);
  std::vector<double> survival(174), dens(174, -1.0);
  std::vector<int> status(174, 1);
  for (auto& h : survival) h = unif(rng);
  const double v = cluster_loglik_terms(gen, table, survival, dens, status);
  CHECK(std::isfinite(v));
}
