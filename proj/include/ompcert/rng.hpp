#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ompcert {

/// SplitMix64 mixing step (Steele/Lea/Flood). Used to derive independent
/// per-instance seeds from (master_seed, index) as a pure function, so
/// randomized suites give identical results under any parallel schedule.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master_seed,
                                 std::uint64_t index) {
  return splitmix64(master_seed ^ splitmix64(index + 1));
}

/// Deterministic random stream with a fixed, versioned algorithm:
/// std::mt19937_64 (bit-exact per the C++ standard), uniforms from the top
/// 53 bits of each draw, normals via the Box-Muller transform. Seeds
/// therefore reproduce the same matrices and noise on every platform with
/// the same libm; this is the replay contract for all experiment output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1): top 53 bits scaled by 2^-53.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; draws two uniforms per pair and
  /// caches the second variate.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // 1-u1 lies in (0,1], keeping the log argument positive.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * pi() * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % bound;
  }

  static constexpr double pi() { return 3.141592653589793238462643383279502884; }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ompcert
