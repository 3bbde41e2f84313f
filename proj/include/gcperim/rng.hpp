#pragma once

#include <cmath>
#include <cstdint>

namespace gcperim {

// splitmix64. Every random variate in the library derives from this engine:
// std::uniform_real_distribution and friends are not bit-stable across
// standard library implementations, and the reproducibility contract is
// bit-identical output for identical seeds on any platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform on [0,1) with 53-bit resolution
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform on the open interval (0,1); exact 0.0 draws are rejected
  double uniform_open() {
    for (;;) {
      double u = uniform();
      if (u != 0.0) return u;
    }
  }

  // Marsaglia polar method; always consumes a fresh pair of draws so the
  // stream layout does not depend on call parity.
  void normal_pair(double& a, double& b) {
    for (;;) {
      double v1 = 2.0 * uniform() - 1.0;
      double v2 = 2.0 * uniform() - 1.0;
      double s = v1 * v1 + v2 * v2;
      if (s > 0.0 && s < 1.0) {
        double f = std::sqrt(-2.0 * std::log(s) / s);
        a = v1 * f;
        b = v2 * f;
        return;
      }
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace gcperim
