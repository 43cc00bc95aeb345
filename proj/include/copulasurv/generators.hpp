#pragma once

#include <vector>

#include "copulasurv/signed_log.hpp"

namespace copulasurv {

enum class CopulaFamily { Clayton, GumbelHougaard, InverseGaussian };

const char* family_name(CopulaFamily f);

// Archimedean generator phi_theta with a PVF Laplace-transform representation.
//   Clayton:           phi(s) = (1 + theta s)^(-1/theta),        theta > 0
//   Gumbel-Hougaard:   phi(s) = exp(-s^theta),                   0 < theta < 1
//   inverse Gaussian:  phi(s) = exp(1/theta - sqrt(1/theta^2 + 2 s/theta)),
//                                                                theta > 0
struct GeneratorFamily {
  CopulaFamily kind;
  double theta;

  void validate() const; // throws DomainError on an invalid theta
};

// PVF(alpha, delta, gamma) parameters of the mixing distribution.
// Clayton is the alpha -> 0 limit with delta = gamma = 1/theta.
struct PvfParams {
  double alpha;
  double delta;
  double gamma;
};

PvfParams pvf_params(const GeneratorFamily& gen);

// Triangular table of log c_{k,j}(alpha), 1 <= j <= k <= max_order.
// c_{k,1} = Gamma(k - alpha)/Gamma(1 - alpha), c_{k,k} = 1,
// c_{k,j} = c_{k-1,j-1} + c_{k-1,j} (k - 1 - j alpha).
// All entries are positive for alpha in [0,1), so no signs are stored.
class CoefficientTable {
public:
  CoefficientTable(int max_order, double alpha);

  int max_order() const { return max_order_; }
  double alpha() const { return alpha_; }
  double log_entry(int k, int j) const {
    return log_c_[static_cast<std::size_t>(k) * (k - 1) / 2 + (j - 1)];
  }

private:
  int max_order_;
  double alpha_;
  std::vector<double> log_c_;
};

CoefficientTable pvf_coefficients(int max_order, double alpha);

// phi_theta(s) for s >= 0; phi(0) = 1, strictly decreasing.
double phi(const GeneratorFamily& gen, double s);

// log phi_theta(s); exact even where phi underflows.
double log_phi(const GeneratorFamily& gen, double s);

// Inverse generator on (0, 1]; phi_inv(1) = 0.
double phi_inv(const GeneratorFamily& gen, double u);

// k-th derivative of phi_theta at s as a signed log-value. Sign is (-1)^k
// for k >= 1 (complete monotonicity) and +1 for k = 0. Clayton uses its
// exact closed product form; the other families evaluate the PVF sum with
// log-sum-exp over the coefficient table.
SignedLogValue phi_deriv_k(const GeneratorFamily& gen, double s, int k,
                           const CoefficientTable& table);

// PVF-sum evaluation for every family, including Clayton through its
// alpha = 0 limit. Exposed for cross-checks against the product form.
SignedLogValue phi_deriv_k_pvf(const GeneratorFamily& gen, double s, int k,
                               const CoefficientTable& table);

// Kendall's tau = 1 + 4 int_0^1 phi_inv(t) * phi'(phi_inv(t)) dt by adaptive
// quadrature (absolute tolerance 1e-9). Diagnostic; used to calibrate the
// sampler tests.
double kendall_tau(const GeneratorFamily& gen);

} // namespace copulasurv
