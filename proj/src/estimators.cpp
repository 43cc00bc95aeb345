#include "copulasurv/estimators.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "copulasurv/errors.hpp"
#include "copulasurv/optim.hpp"
#include "copulasurv/parallel.hpp"

namespace copulasurv {

const char* method_name(FitReport::Method m) {
  switch (m) {
    case FitReport::Method::OneStageParametric: return "one-stage";
    case FitReport::Method::TwoStageParametric: return "two-stage";
    case FitReport::Method::TwoStageSemiparametric: return "semiparam";
  }
  return "?";
}

double theta_to_working(CopulaFamily family, double theta) {
  if (family == CopulaFamily::GumbelHougaard)
    return std::log(theta / (1.0 - theta));
  return std::log(theta);
}

double theta_from_working(CopulaFamily family, double w) {
  if (family == CopulaFamily::GumbelHougaard) return 1.0 / (1.0 + std::exp(-w));
  return std::exp(w);
}

std::vector<double> theta_grid(CopulaFamily family) {
  std::vector<double> grid(8);
  if (family == CopulaFamily::GumbelHougaard) {
    const double lo = theta_to_working(family, 0.05);
    const double hi = theta_to_working(family, 0.95);
    for (int i = 0; i < 8; ++i)
      grid[i] = theta_from_working(family, lo + (hi - lo) * i / 7.0);
  } else {
    const double lo = std::log(0.05), hi = std::log(8.0);
    for (int i = 0; i < 8; ++i)
      grid[i] = std::exp(lo + (hi - lo) * i / 7.0);
  }
  return grid;
}

double one_stage_variance(const InformationBlocks& blocks) {
  const auto p = blocks.I_bb.rows();
  if (!(blocks.I_tt > 0.0))
    throw NumericError("one_stage_variance: I_thetatheta must be positive");
  Eigen::MatrixXd full(p + 1, p + 1);
  full.topLeftCorner(p, p) = blocks.I_bb;
  full.topRightCorner(p, 1) = blocks.I_bt;
  full.bottomLeftCorner(1, p) = blocks.I_bt.transpose();
  full(p, p) = blocks.I_tt;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(full);
  if (!lu.isInvertible())
    throw NumericError("one_stage_variance: singular information matrix");
  const Eigen::MatrixXd inv = lu.inverse();
  const Eigen::MatrixXd inv_bb = inv.topLeftCorner(p, p);
  const double quad = blocks.I_bt.transpose() * inv_bb * blocks.I_bt;
  return 1.0 / blocks.I_tt + quad / (blocks.I_tt * blocks.I_tt);
}

double two_stage_variance(double I_tt, const Eigen::VectorXd& I_bt,
                          const Eigen::MatrixXd& sandwich) {
  if (!(I_tt > 0.0))
    throw NumericError("two_stage_variance: I_thetatheta must be positive");
  const double quad = I_bt.transpose() * sandwich * I_bt;
  if (quad < -1e-10 * std::max(1.0, std::abs(I_tt)))
    throw NumericError("two_stage_variance: negative quadratic form "
                       "(bad Hessian or sandwich)");
  return 1.0 / I_tt + std::max(quad, 0.0) / (I_tt * I_tt);
}

namespace {

std::vector<std::pair<int, int>> jackknife_group_bounds(int n_clusters, int g) {
  std::vector<std::pair<int, int>> bounds;
  bounds.reserve(g);
  for (int k = 0; k < g; ++k) {
    const int lo = static_cast<int>(static_cast<long long>(k) * n_clusters / g);
    const int hi =
        static_cast<int>(static_cast<long long>(k + 1) * n_clusters / g);
    bounds.emplace_back(lo, hi);
  }
  return bounds;
}

Dataset delete_group(const Dataset& data, const std::vector<int>& order,
                     int lo, int hi) {
  Dataset out;
  out.covariate_names = data.covariate_names;
  out.clusters.reserve(data.clusters.size() - (hi - lo));
  for (int pos = 0; pos < static_cast<int>(order.size()); ++pos) {
    if (pos >= lo && pos < hi) continue;
    out.clusters.push_back(data.clusters[order[pos]]);
  }
  return out;
}

} // namespace

double grouped_jackknife_se(
    const std::function<double(const Dataset&)>& refit, const Dataset& data,
    int g, std::vector<std::string>* warnings) {
  const int n_clusters = data.n_clusters();
  if (g < 2) throw DomainError("grouped jackknife needs g >= 2");
  g = std::min(g, n_clusters);
  const auto order = data.cluster_order_by_id();
  const auto bounds = jackknife_group_bounds(n_clusters, g);

  std::vector<double> values;
  values.reserve(g);
  int failures = 0;
  for (const auto& [lo, hi] : bounds) {
    try {
      values.push_back(refit(delete_group(data, order, lo, hi)));
    } catch (const Error& e) {
      ++failures;
      if (warnings) {
        std::ostringstream os;
        os << "jackknife refit failed for group [" << lo << "," << hi
           << "): " << e.what();
        warnings->push_back(os.str());
      }
    }
  }
  if (failures > 0 && failures * 20 >= g) {
    std::ostringstream os;
    os << "grouped jackknife: " << failures << " of " << g
       << " refits failed (>= 5%)";
    throw ConvergenceError(os.str());
  }
  const int m = static_cast<int>(values.size());
  if (m < 2) throw ConvergenceError("grouped jackknife: too few usable refits");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= m;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt((m - 1.0) / m * ss);
}

namespace {

CoefficientTable make_table(CopulaFamily family, double theta, int k_max) {
  return CoefficientTable(std::max(k_max, 1),
                          pvf_params({family, theta}).alpha);
}

// Full parametric log-likelihood as a function of the natural parameters
// (lambda, rho, beta..., theta).
double natural_loglik(CopulaFamily family, const Dataset& data, int k_max,
                      const Eigen::VectorXd& nat) {
  const int p = data.covariate_count();
  WeibullMargin margin;
  margin.lambda = nat[0];
  margin.rho = nat[1];
  margin.beta.assign(p, 0.0);
  for (int m = 0; m < p; ++m) margin.beta[m] = nat[2 + m];
  const GeneratorFamily gen{family, nat[2 + p]};
  const CoefficientTable table = make_table(family, nat[2 + p], k_max);
  return total_loglik(gen, margin, data, table);
}

void require_multisubject_cluster(const Dataset& data) {
  for (const auto& c : data.clusters)
    if (c.size() >= 2) return;
  throw IdentifiabilityError(
      "association parameter is unidentifiable: every cluster has one subject");
}

void add_boundary_warning(CopulaFamily family, double theta,
                          std::vector<std::string>& warnings) {
  const double w = theta_to_working(family, theta);
  if (std::abs(w) > 9.0) {
    std::ostringstream os;
    os << "theta = " << theta << " is near the " << family_name(family)
       << " domain boundary; estimate and standard error are unreliable";
    warnings.push_back(os.str());
  }
}

struct StageTwoResult {
  double theta = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Grid scan in working space, then golden-section refinement.
StageTwoResult maximize_theta(CopulaFamily family,
                              const std::function<double(double)>& loglik) {
  std::vector<double> working;
  for (double t : theta_grid(family))
    working.push_back(theta_to_working(family, t));
  auto f = [&](double w) { return loglik(theta_from_working(family, w)); };
  const OptimResult opt = maximize_scalar(f, working, 1e-10);
  StageTwoResult out;
  out.theta = theta_from_working(family, opt.x[0]);
  out.objective = opt.value;
  out.iterations = opt.iterations;
  out.converged = opt.converged;
  return out;
}

} // namespace

FitReport fit_two_stage_parametric(CopulaFamily family, const Dataset& data) {
  data.validate();
  require_multisubject_cluster(data);
  const WeibullIndependenceFit stage1 = fit_weibull_independence(data);
  const int p = data.covariate_count();
  const int k_max = std::max(data.max_cluster_events(), 1);

  const StageTwoResult stage2 = maximize_theta(family, [&](double theta) {
    const GeneratorFamily gen{family, theta};
    return total_loglik(gen, stage1.margin, data,
                        make_table(family, theta, k_max));
  });

  FitReport report;
  report.method = FitReport::Method::TwoStageParametric;
  report.se_method = FitReport::SeMethod::Sandwich;
  report.estimates["lambda"] = stage1.margin.lambda;
  report.estimates["rho"] = stage1.margin.rho;
  for (int m = 0; m < p; ++m)
    report.estimates["beta:" + data.covariate_names[m]] =
        stage1.margin.beta[m];
  report.estimates["theta"] = stage2.theta;
  report.loglik = stage2.objective;
  report.converged = stage2.converged;
  report.iterations = stage1.iterations + stage2.iterations;
  add_boundary_warning(family, stage2.theta, report.warnings);

  // Two-stage variance: I_thetatheta and I_thetabeta from the full Hessian
  // at (beta-bar, theta-bar), stage-1 robust sandwich for the margin part.
  Eigen::VectorXd nat(2 + p + 1);
  nat[0] = stage1.margin.lambda;
  nat[1] = stage1.margin.rho;
  for (int m = 0; m < p; ++m) nat[2 + m] = stage1.margin.beta[m];
  nat[2 + p] = stage2.theta;
  auto f_nat = [&](const Eigen::VectorXd& v) {
    return natural_loglik(family, data, k_max, v);
  };
  const Eigen::MatrixXd info = -fd_hessian(f_nat, nat);
  const double I_tt = info(2 + p, 2 + p);
  const Eigen::VectorXd I_bt = info.topRightCorner(2 + p, 1);
  const Eigen::MatrixXd sandwich = stage1.sandwich();
  try {
    const double var_theta = two_stage_variance(I_tt, I_bt, sandwich);
    report.standard_errors["theta"] = std::sqrt(var_theta);
  } catch (const NumericError& e) {
    report.warnings.push_back(std::string("theta SE unavailable: ") +
                              e.what());
    report.standard_errors["theta"] =
        std::numeric_limits<double>::quiet_NaN();
  }
  report.standard_errors["lambda"] = std::sqrt(sandwich(0, 0));
  report.standard_errors["rho"] = std::sqrt(sandwich(1, 1));
  for (int m = 0; m < p; ++m)
    report.standard_errors["beta:" + data.covariate_names[m]] =
        std::sqrt(sandwich(2 + m, 2 + m));
  return report;
}

FitReport fit_one_stage(
    CopulaFamily family, const Dataset& data,
    const std::optional<std::map<std::string, double>>& init) {
  data.validate();
  require_multisubject_cluster(data);
  const int p = data.covariate_count();
  const int dim = 2 + p + 1;
  const int k_max = std::max(data.max_cluster_events(), 1);

  // Working coordinates: (log lambda, log rho, beta..., working theta).
  Eigen::VectorXd x0(dim);
  if (init) {
    const auto& m = *init;
    auto get = [&](const std::string& key) {
      auto it = m.find(key);
      if (it == m.end())
        throw DomainError("fit_one_stage init is missing '" + key + "'");
      return it->second;
    };
    x0[0] = std::log(get("lambda"));
    x0[1] = std::log(get("rho"));
    for (int j = 0; j < p; ++j)
      x0[2 + j] = get("beta:" + data.covariate_names[j]);
    x0[2 + p] = theta_to_working(family, get("theta"));
  } else {
    const FitReport seed = fit_two_stage_parametric(family, data);
    x0[0] = std::log(seed.estimates.at("lambda"));
    x0[1] = std::log(seed.estimates.at("rho"));
    for (int j = 0; j < p; ++j)
      x0[2 + j] = seed.estimates.at("beta:" + data.covariate_names[j]);
    x0[2 + p] = theta_to_working(family, seed.estimates.at("theta"));
  }

  auto f = [&](const Eigen::VectorXd& x) -> double {
    WeibullMargin margin;
    margin.lambda = std::exp(x[0]);
    margin.rho = std::exp(x[1]);
    margin.beta.assign(p, 0.0);
    for (int j = 0; j < p; ++j) margin.beta[j] = x[2 + j];
    const double theta = theta_from_working(family, x[2 + p]);
    try {
      return total_loglik({family, theta}, margin, data,
                          make_table(family, theta, k_max));
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const OptimResult opt = maximize_bfgs(f, {}, x0);
  if (!opt.converged) {
    std::ostringstream os;
    os << "one-stage fit did not converge after " << opt.iterations
       << " iterations (score norm " << opt.grad_norm << ")";
    throw ConvergenceError(os.str());
  }

  FitReport report;
  report.method = FitReport::Method::OneStageParametric;
  report.se_method = FitReport::SeMethod::Hessian;
  const double lambda = std::exp(opt.x[0]);
  const double rho = std::exp(opt.x[1]);
  const double theta = theta_from_working(family, opt.x[2 + p]);
  report.estimates["lambda"] = lambda;
  report.estimates["rho"] = rho;
  for (int j = 0; j < p; ++j)
    report.estimates["beta:" + data.covariate_names[j]] = opt.x[2 + j];
  report.estimates["theta"] = theta;
  report.loglik = opt.value;
  report.converged = true;
  report.iterations = opt.iterations;
  add_boundary_warning(family, theta, report.warnings);

  // SEs from the inverse of the natural-scale observed information.
  Eigen::VectorXd nat(dim);
  nat[0] = lambda;
  nat[1] = rho;
  for (int j = 0; j < p; ++j) nat[2 + j] = opt.x[2 + j];
  nat[2 + p] = theta;
  auto f_nat = [&](const Eigen::VectorXd& v) {
    return natural_loglik(family, data, k_max, v);
  };
  const Eigen::MatrixXd info = -fd_hessian(f_nat, nat);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd cov = lu.inverse();
    report.standard_errors["lambda"] = std::sqrt(std::max(cov(0, 0), 0.0));
    report.standard_errors["rho"] = std::sqrt(std::max(cov(1, 1), 0.0));
    for (int j = 0; j < p; ++j)
      report.standard_errors["beta:" + data.covariate_names[j]] =
          std::sqrt(std::max(cov(2 + j, 2 + j), 0.0));
    report.standard_errors["theta"] =
        std::sqrt(std::max(cov(2 + p, 2 + p), 0.0));
  } else {
    report.warnings.push_back(
        "observed information is singular; standard errors unavailable");
    for (const auto& [key, _] : report.estimates)
      report.standard_errors[key] = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

namespace {

struct SemiparamPoint {
  std::vector<double> beta;
  double theta = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

SemiparamPoint semiparam_point(CopulaFamily family, const Dataset& data) {
  const CoxMargin margin = fit_cox(data);
  const PluginTerms terms = plugin_terms(margin, data);
  const int k_max = std::max(terms.max_events, 1);
  const StageTwoResult stage2 = maximize_theta(family, [&](double theta) {
    const GeneratorFamily gen{family, theta};
    return total_loglik_plugin(gen, terms, make_table(family, theta, k_max));
  });
  SemiparamPoint out;
  out.beta = margin.beta;
  out.theta = stage2.theta;
  out.objective = stage2.objective;
  out.iterations = stage2.iterations;
  out.converged = stage2.converged;
  return out;
}

} // namespace

FitReport fit_two_stage_semiparametric(CopulaFamily family,
                                       const Dataset& data,
                                       std::optional<int> jackknife_groups,
                                       int threads) {
  data.validate();
  require_multisubject_cluster(data);
  const int p = data.covariate_count();
  const SemiparamPoint point = semiparam_point(family, data);

  FitReport report;
  report.method = FitReport::Method::TwoStageSemiparametric;
  report.se_method = FitReport::SeMethod::Jackknife;
  for (int m = 0; m < p; ++m)
    report.estimates["beta:" + data.covariate_names[m]] = point.beta[m];
  report.estimates["theta"] = point.theta;
  report.loglik = point.objective;
  report.converged = point.converged;
  report.iterations = point.iterations;
  add_boundary_warning(family, point.theta, report.warnings);

  // Grouped jackknife over full two-stage refits (Cox margin re-estimated
  // on every deletion), for both theta and the covariate effects.
  const int n_clusters = data.n_clusters();
  int g = jackknife_groups.value_or(n_clusters);
  if (g < 2) throw DomainError("jackknife needs at least 2 groups");
  g = std::min(g, n_clusters);
  const auto order = data.cluster_order_by_id();
  const auto bounds = jackknife_group_bounds(n_clusters, g);

  std::vector<std::optional<SemiparamPoint>> refits(g);
  std::mutex warn_mutex;
  parallel_for(g, threads, [&](int k) {
    try {
      refits[k] = semiparam_point(
          family, delete_group(data, order, bounds[k].first, bounds[k].second));
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(warn_mutex);
      std::ostringstream os;
      os << "jackknife refit failed for group " << k << ": " << e.what();
      report.warnings.push_back(os.str());
    }
  });

  int failures = 0;
  std::vector<const SemiparamPoint*> ok;
  for (const auto& r : refits) {
    if (r) ok.push_back(&*r);
    else ++failures;
  }
  if (failures > 0 && failures * 20 >= g) {
    std::ostringstream os;
    os << "grouped jackknife: " << failures << " of " << g
       << " refits failed (>= 5%)";
    throw ConvergenceError(os.str());
  }
  const int m = static_cast<int>(ok.size());
  if (m < 2)
    throw ConvergenceError("grouped jackknife: too few usable refits");

  auto jack_se = [m](auto&& value_of) {
    double mean = 0.0;
    for (int k = 0; k < m; ++k) mean += value_of(k);
    mean /= m;
    double ss = 0.0;
    for (int k = 0; k < m; ++k) {
      const double d = value_of(k) - mean;
      ss += d * d;
    }
    return std::sqrt((m - 1.0) / m * ss);
  };
  report.standard_errors["theta"] =
      jack_se([&](int k) { return ok[k]->theta; });
  for (int j = 0; j < p; ++j)
    report.standard_errors["beta:" + data.covariate_names[j]] =
        jack_se([&](int k) { return ok[k]->beta[j]; });
  return report;
}

} // namespace copulasurv
