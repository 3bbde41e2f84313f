#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "gcperim/errors.hpp"
#include "gcperim/geometry.hpp"
#include "gcperim/rng.hpp"

// Deterministic generation of labeled i.i.d. uniform clouds on (0,1)^d.
// The whole pipeline (sample -> label) is a pure function of
// (seed, n, d, shape); trial streams are split by counter-based mixing so
// trials can run in any order on any number of workers.

namespace gcperim {

struct SampleConfig {
  std::int64_t n = 0;
  int d = 2;
  std::uint64_t seed = 0;
};

struct LabeledCloud {
  int d = 0;
  std::int64_t n = 0;
  std::vector<double> points;         // row-major n x d, every coordinate in (0,1)
  std::vector<std::uint8_t> labels;   // 1 = in the set
  std::uint64_t seed = 0;             // provenance

  std::span<const double> point(std::int64_t i) const {
    return {points.data() + i * d, static_cast<std::size_t>(d)};
  }
};

// Injective, avalanche-mixed derivation of per-trial seeds: the splitmix64
// finalizer is a bijection applied to base + GOLDEN * (index + 1).
inline std::uint64_t spawn_trial_seed(std::uint64_t base_seed, std::int64_t trial_index) {
  if (trial_index < 0) throw ArgumentError("spawn_trial_seed: trial_index >= 0 required");
  std::uint64_t z =
      base_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(trial_index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::vector<double> sample_uniform(const SampleConfig& cfg) {
  if (cfg.n < 0) throw ArgumentError("sample_uniform: n >= 0 required");
  if (cfg.d < 2) throw ArgumentError("sample_uniform: d >= 2 required");
  if (cfg.n > std::numeric_limits<std::int64_t>::max() / (8 * cfg.d))
    throw ResourceError("sample_uniform: n*d exceeds addressable memory");
  std::vector<double> pts(static_cast<std::size_t>(cfg.n) * cfg.d);
  SplitMix64 gen(cfg.seed);
  for (double& x : pts) x = gen.uniform_open();
  return pts;
}

inline LabeledCloud label_cloud(std::vector<double> points, int d, const Shape& shape,
                                std::uint64_t seed) {
  if (d != shape.dim()) throw ArgumentError("label_cloud: dimension mismatch");
  if (points.size() % d != 0) throw ArgumentError("label_cloud: ragged point array");
  LabeledCloud cloud;
  cloud.d = d;
  cloud.n = static_cast<std::int64_t>(points.size()) / d;
  cloud.points = std::move(points);
  cloud.seed = seed;
  cloud.labels.resize(cloud.n);
  for (std::int64_t i = 0; i < cloud.n; ++i)
    cloud.labels[i] = shape.contains(cloud.point(i)) ? 1 : 0;
  return cloud;
}

inline LabeledCloud sample_labeled(const SampleConfig& cfg, const Shape& shape) {
  return label_cloud(sample_uniform(cfg), cfg.d, shape, cfg.seed);
}

}  // namespace gcperim
