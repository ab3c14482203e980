#pragma once

#include <cstdint>

namespace soar {

/// splitmix64. Tiny and stable: simulation results must not depend on any
/// standard-library distribution implementation.
struct Rng {
  uint64_t state = 0x2545f4914f6cdd1dULL;

  explicit Rng(uint64_t seed = 1) : state(seed ^ 0x9e3779b97f4a7c15ULL) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// uniform integer in [0, n)
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }

  /// uniform integer in [lo, hi]
  int64_t range(int64_t lo, int64_t hi) {
    return lo + int64_t(below(uint64_t(hi - lo + 1)));
  }

  /// uniform real in [lo, hi)
  double real(double lo, double hi) {
    double u = double(next() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
    return lo + u * (hi - lo);
  }

  bool chance(double p) { return real(0.0, 1.0) < p; }
};

}  // namespace soar
