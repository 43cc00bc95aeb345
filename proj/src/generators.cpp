#include "copulasurv/generators.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "copulasurv/errors.hpp"

namespace copulasurv {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* family_name(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Clayton: return "clayton";
    case CopulaFamily::GumbelHougaard: return "gumbel";
    case CopulaFamily::InverseGaussian: return "invgauss";
  }
  return "?";
}

void GeneratorFamily::validate() const {
  switch (kind) {
    case CopulaFamily::Clayton:
    case CopulaFamily::InverseGaussian:
      if (!(theta > 0.0) || !std::isfinite(theta)) {
        std::ostringstream os;
        os << family_name(kind) << " requires theta > 0, got " << theta;
        throw DomainError(os.str());
      }
      break;
    case CopulaFamily::GumbelHougaard:
      if (!(theta > 0.0) || !(theta < 1.0)) {
        std::ostringstream os;
        os << "gumbel requires 0 < theta < 1, got " << theta;
        throw DomainError(os.str());
      }
      break;
  }
}

PvfParams pvf_params(const GeneratorFamily& gen) {
  gen.validate();
  switch (gen.kind) {
    case CopulaFamily::Clayton:
      return {0.0, 1.0 / gen.theta, 1.0 / gen.theta};
    case CopulaFamily::GumbelHougaard:
      return {gen.theta, gen.theta, 0.0};
    case CopulaFamily::InverseGaussian:
      return {0.5, 1.0 / std::sqrt(2.0 * gen.theta), 1.0 / (2.0 * gen.theta)};
  }
  throw DomainError("unknown copula family");
}

CoefficientTable::CoefficientTable(int max_order, double alpha)
    : max_order_(max_order), alpha_(alpha) {
  if (max_order < 1) throw DomainError("coefficient table needs max_order >= 1");
  if (!(alpha >= 0.0) || !(alpha < 1.0))
    throw DomainError("coefficient table needs alpha in [0, 1)");
  log_c_.resize(static_cast<std::size_t>(max_order) * (max_order + 1) / 2);
  auto at = [this](int k, int j) -> double& {
    return log_c_[static_cast<std::size_t>(k) * (k - 1) / 2 + (j - 1)];
  };
  const double lg1ma = std::lgamma(1.0 - alpha);
  for (int k = 1; k <= max_order; ++k) {
    at(k, 1) = std::lgamma(k - alpha) - lg1ma;
    if (k >= 2) at(k, k) = 0.0;
    for (int j = 2; j < k; ++j) {
      const double factor = (k - 1) - j * alpha;
      const double second =
          factor > 0.0 ? at(k - 1, j) + std::log(factor) : -kInf;
      at(k, j) = log_add_exp(at(k - 1, j - 1), second);
    }
  }
}

CoefficientTable pvf_coefficients(int max_order, double alpha) {
  return CoefficientTable(max_order, alpha);
}

double log_phi(const GeneratorFamily& gen, double s) {
  gen.validate();
  if (!(s >= 0.0)) throw DomainError("phi requires s >= 0");
  switch (gen.kind) {
    case CopulaFamily::Clayton:
      return -std::log1p(gen.theta * s) / gen.theta;
    case CopulaFamily::GumbelHougaard:
      return -std::pow(s, gen.theta);
    case CopulaFamily::InverseGaussian: {
      const double t = gen.theta;
      // (1 - sqrt(1 + 2 theta s))/theta, rationalized to avoid cancellation
      const double root = std::sqrt(1.0 + 2.0 * t * s);
      return -2.0 * s / (1.0 + root);
    }
  }
  throw DomainError("unknown copula family");
}

double phi(const GeneratorFamily& gen, double s) {
  return std::exp(log_phi(gen, s));
}

double phi_inv(const GeneratorFamily& gen, double u) {
  gen.validate();
  if (!(u > 0.0) || !(u <= 1.0))
    throw DomainError("phi_inv requires u in (0, 1]");
  const double lu = std::log(u);
  switch (gen.kind) {
    case CopulaFamily::Clayton:
      // (u^-theta - 1)/theta via expm1 for accuracy near theta -> 0
      return std::expm1(-gen.theta * lu) / gen.theta;
    case CopulaFamily::GumbelHougaard:
      if (u == 1.0) return 0.0;
      return std::pow(-lu, 1.0 / gen.theta);
    case CopulaFamily::InverseGaussian:
      return -lu + gen.theta * lu * lu / 2.0;
  }
  throw DomainError("unknown copula family");
}

namespace {

// Clayton closed form:
//   phi^(k)(s) = (-1)^k (1 + theta s)^(-1/theta - k) prod_{j=1}^{k-1}(1 + j theta)
SignedLogValue clayton_deriv(double theta, double s, int k) {
  double log_mag = (-1.0 / theta - k) * std::log1p(theta * s);
  for (int j = 1; j < k; ++j) log_mag += std::log1p(j * theta);
  return {log_mag, (k % 2 == 0) ? +1 : -1};
}

} // namespace

SignedLogValue phi_deriv_k_pvf(const GeneratorFamily& gen, double s, int k,
                               const CoefficientTable& table) {
  gen.validate();
  if (!(s >= 0.0)) throw DomainError("phi_deriv_k requires s >= 0");
  if (k == 0) return {log_phi(gen, s), +1};
  if (k > table.max_order())
    throw DomainError("derivative order exceeds coefficient table size");
  const PvfParams p = pvf_params(gen);
  if (std::abs(p.alpha - table.alpha()) > 1e-14)
    throw DomainError("coefficient table alpha does not match the generator");
  if (p.gamma + s <= 0.0)
    throw SingularPointError(
        "PVF derivative is singular at s = 0 when gamma = 0 (Gumbel-Hougaard)");
  const double log_delta = std::log(p.delta);
  const double log_gs = std::log(p.gamma + s);
  double m = -kInf;
  std::vector<double> terms(static_cast<std::size_t>(k));
  for (int j = 1; j <= k; ++j) {
    const double t =
        table.log_entry(k, j) + j * log_delta + (j * p.alpha - k) * log_gs;
    terms[j - 1] = t;
    m = std::max(m, t);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return {log_phi(gen, s) + m + std::log(acc), (k % 2 == 0) ? +1 : -1};
}

SignedLogValue phi_deriv_k(const GeneratorFamily& gen, double s, int k,
                           const CoefficientTable& table) {
  gen.validate();
  if (!(s >= 0.0)) throw DomainError("phi_deriv_k requires s >= 0");
  if (k < 0) throw DomainError("phi_deriv_k requires k >= 0");
  if (k == 0) return {log_phi(gen, s), +1};
  if (gen.kind == CopulaFamily::Clayton) return clayton_deriv(gen.theta, s, k);
  return phi_deriv_k_pvf(gen, s, k, table);
}

namespace {

// Adaptive Simpson on [a, b] with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  if (depth > 60)
    throw NumericError("kendall_tau quadrature failed to converge");
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1);
}

} // namespace

double kendall_tau(const GeneratorFamily& gen) {
  gen.validate();
  const CoefficientTable table(1, pvf_params(gen).alpha);
  // integrand g(t) = phi_inv(t) * phi'(phi_inv(t)); g -> 0 at both endpoints
  auto g = [&](double t) -> double {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double psi = phi_inv(gen, t);
    if (psi <= 0.0) return 0.0;
    const SignedLogValue d1 = phi_deriv_k(gen, psi, 1, table);
    // psi * phi'(psi), evaluated through logs to dodge 0 * inf at the edges
    return -std::exp(std::log(psi) + d1.log_magnitude);
  };
  const double a = 0.0, b = 1.0, m = 0.5;
  const double fa = 0.0, fm = g(m), fb = 0.0;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double integral =
      adaptive_simpson(g, a, b, fa, fm, fb, whole, 1e-9, 0);
  return 1.0 + 4.0 * integral;
}

} // namespace copulasurv
