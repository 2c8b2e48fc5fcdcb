#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "hmimo/types.hpp"

namespace hmimo {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a list of stream tags.
/// The result depends on the order of the tags.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(parent);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

/// Fixed stream tags, so call sites don't share streams by accident.
enum class Stream : std::uint64_t {
  variance_samples = 1,
  channel = 2,
  combiner = 3,
  noise = 4,
  support = 5,
};

constexpr std::uint64_t derive_seed(std::uint64_t parent, Stream s) {
  return derive_seed(parent, {static_cast<std::uint64_t>(s)});
}

/// 64-bit Mersenne Twister with distribution code written out here: the
/// std:: distributions are implementation-defined, which would make output
/// bytes depend on the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  cplx complex_normal(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  /// Unit-modulus complex number with uniform phase.
  cplx unit_phase() {
    const double a = kTwoPi * uniform();
    return {std::cos(a), std::sin(a)};
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hmimo
