#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>

#include "gcperim/errors.hpp"
#include "gcperim/quadrature.hpp"
#include "gcperim/stats.hpp"

// Analytic constants of the estimator: unit-ball volume alpha_d, surface
// tension sigma_d, spherical-cap volumes, the variance constant C_d, the
// fluctuation rate f(n, eps) with its regime taxonomy, optimal-eps schedules
// and normal quantiles. Everything is computed at runtime from closed forms
// or quadrature; C_d is memoized per dimension.

namespace gcperim {

// alpha_d = pi^{d/2} / Gamma(d/2 + 1)
inline double unit_ball_volume(int d) {
  if (d < 1) throw ArgumentError("unit_ball_volume: d >= 1 required");
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

// Surface area of the unit m-sphere (boundary of the unit ball in R^{m+1}).
inline double sphere_surface(int m) {
  if (m < 0) throw ArgumentError("sphere_surface: m >= 0 required");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

// sigma_d = 2 s_{d-2} / ((d+1)(d-1)); equals the integral of |z_1| over the
// unit ball in R^d.
inline double surface_tension(int d) {
  if (d < 2) throw ArgumentError("surface_tension: d >= 2 required");
  return 2.0 * sphere_surface(d - 2) / (static_cast<double>(d + 1) * (d - 1));
}

// Volume of the unit-ball cap above height t, via the 1-D integral
// alpha_{d-1} * int_t^1 (1-s^2)^{(d-1)/2} ds.  The substitution s = sin(u)
// removes the endpoint square-root, so the adaptive rule reaches 1e-12.
inline double cap_volume(int d, double t) {
  if (d < 2) throw ArgumentError("cap_volume: d >= 2 required");
  if (t < 0.0 || t > 1.0) throw ArgumentError("cap_volume: t in [0,1] required");
  if (t == 1.0) return 0.0;
  double a = std::asin(t);
  double integral = adaptive_simpson(
      [d](double u) { return std::pow(std::cos(u), d); }, a, 0.5 * std::numbers::pi,
      1e-13);
  return unit_ball_volume(d - 1) * integral;
}

// C_d = 2 * int_0^1 cap_volume(d, t)^2 dt
inline double variance_constant(int d) {
  if (d < 2) throw ArgumentError("variance_constant: d >= 2 required");
  static std::mutex mu;
  static std::map<int, double> cache;
  {
    std::scoped_lock lock(mu);
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
  }
  double value = 2.0 * adaptive_simpson(
                           [d](double t) {
                             double a = cap_volume(d, t);
                             return a * a;
                           },
                           0.0, 1.0, 1e-10);
  std::scoped_lock lock(mu);
  cache.emplace(d, value);  // first writer wins; recomputation is identical
  return value;
}

// Exact pair-overlap volume of the unit m-cube:
//   G_m(r) = |{(u,v) in [0,1]^m x [0,1]^m : ||u-v|| <= r}|, 0 <= r <= 1.
// The difference u-v has per-coordinate density (1-|w|), so
//   G_m(r) = sum_{k=0}^m (-1)^k C(m,k) I_{m,k} r^{m+k},
//   I_{m,k} = int_{B_m} |z_1...z_k| dz = 2 pi^{(m-k)/2} / ((m+k) Gamma((m+k)/2)).
inline double cube_pair_volume(int m, double r) {
  if (m < 1) throw ArgumentError("cube_pair_volume: m >= 1 required");
  if (r < 0.0 || r > 1.0) throw ArgumentError("cube_pair_volume: r in [0,1] required");
  double sum = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= m; ++k) {
    double monomial = 2.0 * std::pow(std::numbers::pi, 0.5 * (m - k)) /
                      ((m + k) * std::tgamma(0.5 * (m + k)));
    double term = binom * monomial * std::pow(r, m + k);
    sum += (k % 2 == 0) ? term : -term;
    binom = binom * (m - k) / (k + 1.0);
  }
  return sum;
}

enum class Regime { dense, sparse, below_threshold };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::dense: return "dense";
    case Regime::sparse: return "sparse";
    default: return "below_threshold";
  }
}

struct RegimeClassification {
  Regime regime = Regime::dense;
  double f_value = 0.0;
};

// f(n, eps): 1/sqrt(n eps) for eps >= n^{-1/d} (boundary ties classified
// dense), 1/(n eps^{(d+1)/2}) below it.  eps < n^{-2/(d+1)} carries no
// convergence guarantee and is flagged; f_value continues the sparse formula.
inline RegimeClassification rate_f(std::int64_t n, double eps, int d) {
  if (n < 2) throw ArgumentError("rate_f: n >= 2 required");
  if (!(eps > 0.0)) throw ArgumentError("rate_f: eps > 0 required");
  if (d < 2) throw ArgumentError("rate_f: d >= 2 required");
  double nd = static_cast<double>(n);
  RegimeClassification rc;
  if (eps >= std::pow(nd, -1.0 / d)) {
    rc.regime = Regime::dense;
    rc.f_value = 1.0 / std::sqrt(nd * eps);
  } else {
    rc.regime = eps >= std::pow(nd, -2.0 / (d + 1)) ? Regime::sparse
                                                    : Regime::below_threshold;
    rc.f_value = 1.0 / (nd * std::pow(eps, 0.5 * (d + 1)));
  }
  return rc;
}

// Error-optimal eps schedule (unit prefactor).  interior=false covers sets
// touching the domain boundary.  The d=3 (resp. d=5) branches coincide.
inline double optimal_epsilon(std::int64_t n, int d, bool interior) {
  if (n < 2) throw ArgumentError("optimal_epsilon: n >= 2 required");
  if (d < 2) throw ArgumentError("optimal_epsilon: d >= 2 required");
  double nd = static_cast<double>(n);
  if (interior)
    return d <= 5 ? std::pow(nd, -2.0 / 5.0) : std::pow(nd, -4.0 / (d + 5));
  return d <= 3 ? std::pow(nd, -1.0 / 3.0) : std::pow(nd, -2.0 / (d + 3));
}

// Z_alpha with P(N(0,1) <= Z_alpha) = 1 - alpha, by bisection on the normal
// CDF.  Bracket width shrinks below 1e-12 (required accuracy 1e-8).
inline double z_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5))
    throw ArgumentError("z_quantile: alpha in (0, 0.5) required");
  double lo = 0.0, hi = 10.0;
  double target = 1.0 - alpha;
  while (hi - lo > 1e-13) {
    double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace gcperim
