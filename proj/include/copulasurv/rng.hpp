#pragma once

#include <cstdint>

namespace copulasurv {

// SplitMix64 mixing; used both as the key-derivation hash and as the
// stream generator. Counter-based child streams keyed by (seed, a, b)
// keep every replicate and cluster independent of scheduling order.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

std::uint64_t derive_stream_key(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b);

// Deterministic generator with the variate recipes the sampler needs.
// All algorithms are spelled out here (no std::*_distribution) so a fixed
// seed gives identical draws on every platform and thread count.
class Rng {
public:
  explicit Rng(std::uint64_t key);

  std::uint64_t next_bits();
  double uniform();                 // (0, 1)
  double exponential();             // rate 1
  double normal();                  // standard normal (Box-Muller)
  int uniform_int(int lo, int hi);  // inclusive
  int bernoulli(double p);
  double gamma(double shape, double scale);     // Marsaglia-Tsang
  double positive_stable(double alpha);         // Kanter; LT exp(-s^alpha)
  double inverse_gaussian(double theta);        // mean 1, variance theta

private:
  std::uint64_t s_[4]; // xoshiro256++ state
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

} // namespace copulasurv
