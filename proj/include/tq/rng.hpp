#ifndef TQ_RNG_HPP
#define TQ_RNG_HPP

#include <cstdint>
#include <cmath>
#include <random>

namespace tq {

// Identifies a reproducible random stream: identical (seed, stream) pairs
// reproduce identical draws within this implementation.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RngSpec with_stream(std::uint64_t s) const { return {seed, s}; }
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Stream-splittable generator. Seeding mixes (seed, stream) through
// splitmix64 so distinct stream ids give decorrelated sequences.
class Rng {
 public:
  explicit Rng(RngSpec spec)
      : engine_(detail::splitmix64(detail::splitmix64(spec.seed) ^
                                   detail::splitmix64(~spec.stream))) {}

  // Uniform on (0,1); never returns 0 or 1.
  double uniform() {
    // 53-bit mantissa draw, shifted into the open interval.
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  // Exponential with the given rate, via inversion.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(6.283185307179586476925286766559 * u2);
    have_cached_ = true;
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  double gamma(double shape, double scale) {
    // Marsaglia-Tsang; shape < 1 boosted through the U^{1/shape} trick.
    if (shape < 1.0) {
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

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace tq

#endif  // TQ_RNG_HPP
