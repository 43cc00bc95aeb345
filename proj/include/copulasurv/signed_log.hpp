#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace copulasurv {

// A real value v = sign * exp(log_magnitude). sign == 0 encodes exact zero
// and log_magnitude is then ignored. Keeps high-order generator derivatives
// representable far beyond double range.
struct SignedLogValue {
  double log_magnitude = -std::numeric_limits<double>::infinity();
  int sign = 0;

  static SignedLogValue from_value(double v) {
    if (v == 0.0) return {};
    return {std::log(std::abs(v)), v > 0.0 ? +1 : -1};
  }

  double value() const {
    if (sign == 0) return 0.0;
    return static_cast<double>(sign) * std::exp(log_magnitude);
  }
};

// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline double log_sum_exp(std::span<const double> terms) {
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms) m = std::max(m, t);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return m + std::log(acc);
}

// Kahan compensated accumulator; summation order still matters, callers
// fix the order themselves.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }

  double value() const { return sum; }
};

} // namespace copulasurv
