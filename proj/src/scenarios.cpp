#include "copulasurv/scenarios.hpp"

#include <cstdio>
#include <sstream>

#include "copulasurv/errors.hpp"

namespace copulasurv {

namespace {

// Weibull censoring rates calibrated to the default margin
// (lambda = 0.0316, rho = 1.5, beta = 3, Bernoulli(0.5) covariate):
// lambda_C = 0.0274 gives ~25% censoring, 0.1464 gives ~50%.
constexpr double kCensorLambda25 = 0.0274;
constexpr double kCensorLambda50 = 0.1464;
constexpr double kCensorRho = 1.5;

std::vector<Scenario> build_scenarios() {
  std::vector<Scenario> all;
  struct FamilyGrid {
    CopulaFamily family;
    std::vector<double> thetas;
  };
  const std::vector<FamilyGrid> grids = {
      {CopulaFamily::Clayton, {0.2, 0.5, 1.0, 1.5}},
      {CopulaFamily::GumbelHougaard, {0.2, 0.5, 0.8}},
  };
  const int cluster_counts[] = {50, 200};
  const int censor_pcts[] = {0, 25, 50};
  char buf[64];
  for (const auto& grid : grids) {
    for (double theta : grid.thetas) {
      for (int k : cluster_counts) {
        for (int cens : censor_pcts) {
          Scenario s;
          std::snprintf(buf, sizeof(buf), "%s-t%g-K%d-c%d",
                        family_name(grid.family), theta, k, cens);
          s.name = buf;
          s.config.family = {grid.family, theta};
          s.config.n_clusters = k;
          if (cens == 25)
            s.config.censoring = CensoringConfig{kCensorLambda25, kCensorRho};
          else if (cens == 50)
            s.config.censoring = CensoringConfig{kCensorLambda50, kCensorRho};
          all.push_back(std::move(s));
        }
      }
    }
  }
  return all;
}

} // namespace

const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> scenarios = build_scenarios();
  return scenarios;
}

const Scenario& find_scenario(const std::string& name) {
  for (const auto& s : builtin_scenarios())
    if (s.name == name) return s;
  std::ostringstream os;
  os << "unknown scenario '" << name << "'; valid names:";
  for (const auto& s : builtin_scenarios()) os << " " << s.name;
  throw InputError(os.str());
}

} // namespace copulasurv
