#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace epd {

/// Counter-based deterministic generator (splitmix64). One root seed plus
/// per-(trial, purpose) derived streams keeps gains and noise independently
/// reproducible across platforms.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (no stdlib distribution, so the stream
  /// is identical across standard libraries).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

  /// Circularly-symmetric complex Gaussian with E|w|^2 = variance.
  std::complex<double> complex_gaussian(double variance) {
    const double s = std::sqrt(variance / 2.0);
    return {s * gaussian(), s * gaussian()};
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Stream derivation: hash-mix the root seed with (trial, purpose).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t trial,
                                 std::uint64_t purpose) {
  SplitMix64 mix(root ^ (trial * 0xd1342543de82ef95ULL) ^
                 (purpose * 0x2545f4914f6cdd1dULL));
  mix();
  return mix();
}

namespace seed_purpose {
constexpr std::uint64_t kGains = 1;
constexpr std::uint64_t kNoise = 2;
constexpr std::uint64_t kBootstrap = 3;
}  // namespace seed_purpose

}  // namespace epd
