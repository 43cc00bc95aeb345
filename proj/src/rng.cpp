#include "copulasurv/rng.hpp"

#include <cmath>
#include <numbers>

#include "copulasurv/errors.hpp"

namespace copulasurv {

std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b) {
  SplitMix64 mix(seed);
  mix.state ^= mix.next() + a;
  mix.state ^= mix.next() + (b << 1 | 1);
  return mix.next();
}

Rng::Rng(std::uint64_t key) {
  SplitMix64 mix(key);
  for (auto& s : s_) s = mix.next();
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
} // namespace

std::uint64_t Rng::next_bits() {
  // xoshiro256++
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  // 53-bit mantissa, shifted into the open interval
  for (;;) {
    const double u = (next_bits() >> 11) * 0x1.0p-53;
    if (u > 0.0 && u < 1.0) return u;
  }
}

double Rng::exponential() { return -std::log(uniform()); }

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform(), u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_normal_ = true;
  return r * std::cos(a);
}

int Rng::uniform_int(int lo, int hi) {
  if (hi < lo) throw DomainError("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  // rejection sampling to keep the draw exactly uniform
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t bits;
  do {
    bits = next_bits();
  } while (bits >= limit);
  return lo + static_cast<int>(bits % span);
}

int Rng::bernoulli(double p) { return uniform() < p ? 1 : 0; }

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0))
    throw DomainError("gamma sampler requires positive shape and scale");
  if (shape < 1.0) {
    // boost: X_a = X_{a+1} * U^{1/a}
    const double u = uniform();
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return scale * d * v;
  }
}

double Rng::positive_stable(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw DomainError("positive stable sampler requires alpha in (0, 1)");
  // Kanter's representation: with V ~ U(0, pi) and W ~ Exp(1),
  //   X = (a(V)/W)^((1-alpha)/alpha),
  //   a(v) = sin((1-alpha)v) [sin(alpha v)]^(alpha/(1-alpha)) / [sin v]^(1/(1-alpha))
  // has Laplace transform exp(-s^alpha).
  const double v = uniform() * std::numbers::pi;
  const double w = exponential();
  const double log_a = std::log(std::sin((1.0 - alpha) * v)) +
                       alpha / (1.0 - alpha) * std::log(std::sin(alpha * v)) -
                       1.0 / (1.0 - alpha) * std::log(std::sin(v));
  return std::exp((1.0 - alpha) / alpha * (log_a - std::log(w)));
}

double Rng::inverse_gaussian(double theta) {
  if (!(theta > 0.0))
    throw DomainError("inverse Gaussian sampler requires theta > 0");
  // Michael-Schucany-Haas with mean 1 and variance theta (lambda = 1/theta)
  const double lambda = 1.0 / theta;
  const double n = normal();
  const double y = n * n;
  const double x =
      1.0 + y / (2.0 * lambda) -
      std::sqrt(4.0 * lambda * y + y * y) / (2.0 * lambda);
  if (uniform() <= 1.0 / (1.0 + x)) return x;
  return 1.0 / x;
}

} // namespace copulasurv
