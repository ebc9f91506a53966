// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// Counter-based random numbers: every variate is a pure function of
// (seed, stream, counter), so Monte Carlo runs reproduce bit-for-bit whatever
// the thread count or batch split. Sample i of a run uses stream i.
//
// Mixing is splitmix64 applied to a combined key; Gaussians use the
// Box-Muller transform (two uniforms per complex variate, never changed).

#ifndef NLSQI_RNG_HPP
#define NLSQI_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace nlsqi {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class SeededRng {
 public:
  SeededRng(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
      : seed_(master_seed), stream_(stream_id), key_(splitmix64(splitmix64(master_seed) ^ stream_id)) {}

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Raw 64 bits for draw index `counter`, then advances.
  std::uint64_t next_u64() noexcept { return splitmix64(key_ + splitmix64(counter_++)); }

  /// Uniform on (0, 1]: 53 random bits, never zero.
  double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  /// Standard complex Gaussian: independent N(0, 1/2) real and imaginary
  /// parts, so |g|^2 ~ Exp(1). Consumes exactly two uniforms.
  std::complex<double> complex_gaussian() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace nlsqi

#endif  // NLSQI_RNG_HPP
