#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "copulasurv/simulation.hpp"

using namespace copulasurv;

namespace {

// empirical Kendall tau, O(n^2) concordance count
double empirical_tau(const std::vector<std::pair<double, double>>& pairs) {
  long long conc = 0, disc = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      const double v = (pairs[i].first - pairs[j].first) *
                       (pairs[i].second - pairs[j].second);
      if (v > 0) ++conc;
      else if (v < 0) ++disc;
    }
  return static_cast<double>(conc - disc) / (conc + disc);
}

} // namespace

TEST_CASE("stream keys separate seeds, replicates, and clusters") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t seed : {1ULL, 2ULL})
    for (std::uint64_t r = 0; r < 4; ++r)
      for (std::uint64_t c = 0; c < 4; ++c)
        keys.insert(derive_stream_key(seed, r, c));
  CHECK(keys.size() == 32);
  CHECK(derive_stream_key(9, 3, 5) == derive_stream_key(9, 3, 5));
}

TEST_CASE("uniform and normal moments") {
  Rng rng(derive_stream_key(7, 0, 0));
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("uniform_int and bernoulli ranges") {
  Rng rng(derive_stream_key(8, 0, 0));
  int counts[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < 50000; ++i) {
    const int v = rng.uniform_int(2, 6);
    REQUIRE(v >= 2);
    REQUIRE(v <= 6);
    ++counts[v - 2];
  }
  for (int c : counts) CHECK(c == doctest::Approx(10000).epsilon(0.06));
  int ones = 0;
  for (int i = 0; i < 50000; ++i) ones += rng.bernoulli(0.5);
  CHECK(ones == doctest::Approx(25000).epsilon(0.04));
}

TEST_CASE("gamma draws match the target moments") {
  Rng rng(derive_stream_key(9, 0, 0));
  for (double shape : {0.4, 1.0, 2.5}) {
    const double scale = 1.0 / shape; // mean-1 frailty parametrization
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.gamma(shape, scale);
      REQUIRE(x > 0.0);
      s += x;
      s2 += x * x;
    }
    CHECK(s / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(s2 / n - 1.0 == doctest::Approx(1.0 / shape).epsilon(0.06));
  }
}

TEST_CASE("mixing variables reproduce the generator Laplace transform") {
  const int n = 100000;
  for (auto [fam, theta] :
       {std::pair{CopulaFamily::Clayton, 0.8},
        std::pair{CopulaFamily::GumbelHougaard, 0.6},
        std::pair{CopulaFamily::InverseGaussian, 1.2}}) {
    const GeneratorFamily gen{fam, theta};
    Rng rng(derive_stream_key(11, static_cast<int>(fam), 0));
    std::vector<double> draws(n);
    for (auto& w : draws) {
      w = sample_mixing_variable(gen, rng);
      REQUIRE(w > 0.0);
    }
    for (double s : {0.3, 1.0, 2.5}) {
      double mean = 0.0, m2 = 0.0;
      for (double w : draws) {
        const double e = std::exp(-s * w);
        mean += e;
        m2 += e * e;
      }
      mean /= n;
      const double sd = std::sqrt((m2 / n - mean * mean) / n);
      CHECK(std::abs(mean - phi(gen, s)) <= 4.0 * sd + 1e-12);
    }
  }
}

TEST_CASE("inverse Gaussian draws have the stated mean and variance") {
  Rng rng(derive_stream_key(12, 0, 0));
  const double theta = 0.7;
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.inverse_gaussian(theta);
    REQUIRE(x > 0.0);
    s += x;
    s2 += x * x;
  }
  CHECK(s / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(theta).epsilon(0.05));
}

TEST_CASE("dataset generation is deterministic and respects its config") {
  SimulationConfig cfg;
  cfg.family = {CopulaFamily::Clayton, 0.5};
  cfg.n_clusters = 80;
  cfg.size_min = 2;
  cfg.size_max = 7;
  cfg.seed = 99;
  const Dataset a = generate_dataset(cfg, 3);
  const Dataset b = generate_dataset(cfg, 3);
  REQUIRE(a.n_clusters() == 80);
  CHECK(a.n_subjects() == b.n_subjects());
  for (int i = 0; i < a.n_clusters(); ++i) {
    CHECK(a.clusters[i].id == b.clusters[i].id);
    REQUIRE(a.clusters[i].size() == b.clusters[i].size());
    CHECK(a.clusters[i].size() >= 2);
    CHECK(a.clusters[i].size() <= 7);
    for (int j = 0; j < a.clusters[i].size(); ++j) {
      CHECK(a.clusters[i].subjects[j].time == b.clusters[i].subjects[j].time);
      CHECK(a.clusters[i].subjects[j].status ==
            b.clusters[i].subjects[j].status);
      CHECK(a.clusters[i].subjects[j].covariates ==
            b.clusters[i].subjects[j].covariates);
    }
  }
  const Dataset c = generate_dataset(cfg, 4);
  CHECK(c.clusters[0].subjects[0].time != a.clusters[0].subjects[0].time);
  CHECK_NOTHROW(a.validate());
  // no censoring configured: every subject is an event
  CHECK(a.n_events() == a.n_subjects());
}

TEST_CASE("pairwise dependence matches the family Kendall tau") {
  SimulationConfig cfg;
  cfg.family = {CopulaFamily::GumbelHougaard, 0.5}; // tau = 0.5
  cfg.n_clusters = 1500;
  cfg.size_min = 2;
  cfg.size_max = 2;
  cfg.covariate_prob = 0.0; // shared margin so times inherit the copula
  cfg.seed = 4;
  const Dataset data = generate_dataset(cfg, 0);
  std::vector<std::pair<double, double>> pairs;
  for (const auto& c : data.clusters)
    pairs.emplace_back(c.subjects[0].time, c.subjects[1].time);
  CHECK(empirical_tau(pairs) ==
        doctest::Approx(kendall_tau(cfg.family)).epsilon(0.08));
}

TEST_CASE("censoring constants land near their nominal rates") {
  SimulationConfig cfg;
  cfg.family = {CopulaFamily::Clayton, 0.5};
  cfg.n_clusters = 1500;
  cfg.seed = 15;
  cfg.censoring = CensoringConfig{0.0274, 1.5};
  const Dataset d25 = generate_dataset(cfg, 0);
  const double c25 =
      1.0 - static_cast<double>(d25.n_events()) / d25.n_subjects();
  CHECK(c25 == doctest::Approx(0.25).epsilon(0.2));

  cfg.censoring = CensoringConfig{0.1464, 1.5};
  const Dataset d50 = generate_dataset(cfg, 1);
  const double c50 =
      1.0 - static_cast<double>(d50.n_events()) / d50.n_subjects();
  CHECK(c50 == doctest::Approx(0.50).epsilon(0.1));
}

TEST_CASE("replication harness is deterministic across parallelism") {
  SimulationConfig cfg;
  cfg.family = {CopulaFamily::Clayton, 1.0};
  cfg.n_clusters = 60;
  cfg.size_min = 2;
  cfg.size_max = 5;
  cfg.seed = 77;
  cfg.replicates = 8;

  ReplicationOptions opts;
  opts.methods = {FitReport::Method::TwoStageParametric};
  opts.parallelism = 1;
  const auto serial = run_replication(cfg, opts);
  opts.parallelism = 4;
  const auto parallel = run_replication(cfg, opts);

  const auto& s = serial.methods.at(FitReport::Method::TwoStageParametric);
  const auto& p = parallel.methods.at(FitReport::Method::TwoStageParametric);
  CHECK(serial.replicates == 8);
  CHECK(s.n_success + s.n_fail == 8);
  CHECK(s.n_success >= 7);
  CHECK(s.mean_estimate == p.mean_estimate);
  CHECK(s.mean_se == p.mean_se);
  CHECK(s.empirical_sd == p.empirical_sd);
  CHECK(s.coverage == p.coverage);
  CHECK(s.mean_estimate == doctest::Approx(1.0).epsilon(0.5));
  CHECK(s.coverage >= 0.5);
}

TEST_CASE("config validation rejects nonsense") {
  SimulationConfig cfg;
  cfg.n_clusters = 0;
  CHECK_THROWS(cfg.validate());
  cfg = SimulationConfig{};
  cfg.size_min = 5;
  cfg.size_max = 2;
  CHECK_THROWS(cfg.validate());
  cfg = SimulationConfig{};
  cfg.family.theta = -1.0;
  CHECK_THROWS(cfg.validate());
}
