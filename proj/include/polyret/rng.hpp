// Counter-based random streams.
//
// Every stream is keyed by a tuple of 64-bit identifiers hashed together, so a
// trial's stream is a pure function of (master_seed, indices...) and parallel
// and serial execution produce bit-identical draws.
#pragma once

#include <cmath>
#include <cstdint>

#include "polyret/common.hpp"

namespace polyret {

// SplitMix64 finalizer; also serves as the key-mixing hash.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_keys(std::uint64_t seed) { return mix64(seed); }

template <typename... Rest>
std::uint64_t mix_keys(std::uint64_t seed, std::uint64_t first, Rest... rest) {
  return mix_keys(mix64(seed ^ (first + 0x9e3779b97f4a7c15ULL)), rest...);
}

class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  template <typename... Keys>
  static Rng stream(std::uint64_t master_seed, Keys... keys) {
    return Rng(mix_keys(master_seed, static_cast<std::uint64_t>(keys)...));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in (0,1]; never returns 0 so log() is safe.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; the paired draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * pi() * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Circularly symmetric complex normal with unit variance.
  cxd cnormal() {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    double re = normal();
    double im = normal();
    return {re * inv_sqrt2, im * inv_sqrt2};
  }

  double rademacher() { return (next_u64() & 1u) ? 1.0 : -1.0; }

  template <typename S>
  void fill_normal(Signal<S>& v) {
    for (auto& e : v) {
      if constexpr (is_complex_v<S>) {
        e = cnormal();
      } else {
        e = normal();
      }
    }
  }

  template <typename S>
  Signal<S> normal_vector(std::size_t n) {
    Signal<S> v(n);
    fill_normal(v);
    return v;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace polyret
