#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gcperim/errors.hpp"
#include "gcperim/geometry.hpp"
#include "gcperim/neighbor_graph.hpp"
#include "gcperim/nonlocal.hpp"
#include "gcperim/stats.hpp"

// Hoeffding decomposition of the graph perimeter,
//   GPer - P_eps = 2 U_1 + U_2,
// with U_1 the centered sum of g1(x_i) = phi_bar(x_i) - P_eps and U_2 the
// completely degenerate pair statistic.  The pair sum is rearranged into the
// crossing count plus single sums of phi_bar, so the cost stays
// O(n * n eps^d + n) instead of O(n^2):
//   sum_{i<j} g2 = cut/eps^{d+1} - (n-1) sum_i phi_bar_i + C(n,2) p_eps.

namespace gcperim {

struct HoeffdingTerms {
  double gper = 0.0;
  double p_eps = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
  std::vector<double> g1_samples;  // g1(x_i) per point
};

// phi_bar via the closed form when one exists, Monte Carlo otherwise.
inline double phi_bar_value(const Shape& shape, std::span<const double> x, double eps,
                            std::int64_t fallback_m = 8192,
                            std::uint64_t fallback_seed = 0x70686962ull) {
  if (shape.has_exact_profile()) return phi_bar_exact(shape, x, eps);
  return phi_bar_numeric(shape, x, eps, fallback_m, fallback_seed).value;
}

inline double g1(std::span<const double> x, const Shape& shape, double eps, double p_eps) {
  return phi_bar_value(shape, x, eps) - p_eps;
}

inline double g2(std::span<const double> x, std::span<const double> y, const Shape& shape,
                 double eps, double p_eps) {
  const int d = shape.dim();
  double pair_kernel = 0.0;
  if (shape.contains(x) != shape.contains(y)) {
    double s = 0.0;
    for (int k = 0; k < d; ++k) {
      double t = x[k] - y[k];
      s += t * t;
    }
    if (s <= eps * eps) pair_kernel = std::pow(eps, -(d + 1));
  }
  return pair_kernel - phi_bar_value(shape, x, eps) - phi_bar_value(shape, y, eps) + p_eps;
}

inline HoeffdingTerms decompose(const LabeledCloud& cloud, const Shape& shape, double eps,
                                double p_eps) {
  if (cloud.n < 2) throw ArgumentError("decompose: n >= 2 required");
  if (!(eps > 0.0)) throw ArgumentError("decompose: eps > 0 required");
  const double n = static_cast<double>(cloud.n);

  HoeffdingTerms h;
  h.p_eps = p_eps;
  h.g1_samples.resize(cloud.n);
  KahanSum phi_sum;
  for (std::int64_t i = 0; i < cloud.n; ++i) {
    double phi = phi_bar_value(shape, cloud.point(i), eps);
    h.g1_samples[i] = phi - p_eps;
    phi_sum.add(phi);
  }
  std::int64_t edges = cut_count_tube(cloud, shape, eps);
  h.gper = 2.0 * static_cast<double>(edges) /
           (n * (n - 1.0) * std::pow(eps, cloud.d + 1));
  h.u1 = phi_sum.value() / n - p_eps;
  h.u2 = h.gper - 2.0 * phi_sum.value() / n + p_eps;
  return h;
}

// p_eps computed once at tolerance 1e-8 and shared with both terms, so the
// identity gper - p_eps = 2 u1 + u2 is exact up to rounding.
inline HoeffdingTerms decompose(const LabeledCloud& cloud, const Shape& shape, double eps) {
  NonlocalBudget budget;
  budget.quad_tol = 1e-8;
  return decompose(cloud, shape, eps, nonlocal_perimeter(shape, eps, budget).value);
}

// Monte Carlo estimate of Var(g1(X)) for an interior ball.  Off-tube points
// contribute g1 = -p_eps in closed form; only the tube is sampled, with its
// exact shell volume.
inline McValue g1_variance(const Shape& shape, double eps, std::int64_t m,
                           std::uint64_t seed, double p_eps = -1.0) {
  if (!(eps > 0.0)) throw ArgumentError("g1_variance: eps > 0 required");
  if (m < 2) throw ArgumentError("g1_variance: m >= 2 required");
  const Ball* ball = shape.as_ball();
  if (ball == nullptr)
    throw CapabilityError("g1_variance: implemented for balls (smooth interior sets)");
  if (ball->radius == 0.0) return {0.0, 0.0};
  if (!(shape.dist_to_domain_boundary() > eps))
    throw ArgumentError("g1_variance: interior shape required (dist to cube > eps)");
  const int d = shape.dim();
  if (p_eps < 0.0) {
    NonlocalBudget budget;
    budget.quad_tol = 1e-8;
    p_eps = nonlocal_perimeter(shape, eps, budget).value;
  }

  const double R = ball->radius;
  const double r0 = std::max(0.0, R - eps);
  const double r1 = R + eps;
  const double tube_volume = unit_ball_volume(d) * (std::pow(r1, d) - std::pow(r0, d));

  SplitMix64 gen(seed);
  std::vector<double> dir(d), x(d);
  std::vector<double> sq(m);
  for (std::int64_t i = 0; i < m; ++i) {
    detail::unit_vector(gen, dir);
    double u = gen.uniform_open();
    double r =
        std::pow(std::pow(r0, d) + u * (std::pow(r1, d) - std::pow(r0, d)), 1.0 / d);
    for (int k = 0; k < d; ++k) x[k] = ball->center[k] + r * dir[k];
    double dev = phi_bar_exact(shape, x, eps) - p_eps;
    sq[i] = dev * dev;
  }
  SampleMoments mo = sample_moments(sq);
  McValue out;
  out.value = (1.0 - tube_volume) * p_eps * p_eps + tube_volume * mo.mean;
  out.std_error = tube_volume * standard_error(mo);
  return out;
}

}  // namespace gcperim
