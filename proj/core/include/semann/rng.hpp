#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace semann {

/// Deterministic counter-seedable generator (SplitMix64 stream).
///
/// Every randomized routine in the library derives an independent stream from
/// (seed, index...) via derive(), so serial and parallel execution produce
/// identical draws, and results do not depend on worker count or scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed + kGamma)) {}

  /// Derive an independent stream keyed by the seed and any number of indices.
  template <class... Ids>
  static Rng derive(std::uint64_t seed, Ids... ids) {
    std::uint64_t h = mix(seed + kGamma);
    ((h = mix(h ^ mix(static_cast<std::uint64_t>(ids) + kGamma))), ...);
    return Rng(FromState{}, h);
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n); unbiased via rejection. n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t rem = std::uint64_t(-int64_t(n)) % n;  // 2^64 mod n
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x < rem);
    return x % n;
  }

  /// Standard normal via Box-Muller (pair cached for the next call).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the log finite
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// In-place Fisher-Yates shuffle (self-contained so results are identical
  /// across standard libraries, unlike std::shuffle).
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  struct FromState {};
  Rng(FromState, std::uint64_t state) : state_(state) {}

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace semann
