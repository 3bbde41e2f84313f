#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "gcperim/constants.hpp"
#include "gcperim/errors.hpp"
#include "gcperim/geometry.hpp"
#include "gcperim/quadrature.hpp"
#include "gcperim/rng.hpp"
#include "gcperim/sampling.hpp"
#include "gcperim/stats.hpp"

// Non-local perimeter
//   P_eps = 2 eps^{-(d+1)} * int_{set} int_{D \ set} 1{||x-y|| <= eps} dx dy,
// the exact mean of the graph perimeter, together with the pointwise profile
// phi_bar and the empirical bias law |P_eps - sigma_d Per| ~ eps^slope.
//
// Two evaluation methods:
//  * exact_profile: a 1-D adaptive quadrature.  Balls (d in {2,3}) reduce
//    over the signed distance with the sphere-area layer factor and the lens
//    closed form; this is valid only while the tube's eps-balls stay inside
//    the cube (eps < dist to the domain boundary).  Slabs reduce over the
//    axis gap w = |x_axis - y_axis| against the exact cube-pair overlap
//    kernel G_{d-1}, which accounts for all domain-boundary effects, so the
//    slab value is exact for every eps <= 1.
//  * monte_carlo: stratified sampling of the inner half-tube with its exact
//    volume (ball shell / slab slab) or measured-acceptance rejection inside
//    a box; phi_bar per sample, clipped to the cube.  error_bound is three
//    standard errors.

namespace gcperim {

enum class NonlocalMethod { exact_profile, monte_carlo };

inline const char* nonlocal_method_name(NonlocalMethod m) {
  return m == NonlocalMethod::exact_profile ? "exact_profile" : "monte_carlo";
}

struct NonlocalEstimate {
  double value = 0.0;
  double error_bound = 0.0;  // absolute
  NonlocalMethod method = NonlocalMethod::exact_profile;
  bool budget_warning = false;
};

struct McValue {
  double value = 0.0;
  double std_error = 0.0;
};

struct NonlocalBudget {
  std::int64_t outer_samples = 200000;
  std::int64_t inner_samples = 256;
  double quad_tol = 1e-6;        // absolute tolerance of the exact-profile path
  double mc_target_error = 0.0;  // 0 disables the budget warning
  bool force_monte_carlo = false;  // skip the exact-profile dispatch (cross-checks)
  bool force_numeric_phi = false;  // Monte Carlo evaluates phi_bar by sampling
};

namespace detail {

inline void unit_vector(SplitMix64& gen, std::span<double> out) {
  for (;;) {
    double norm2 = 0.0;
    for (std::size_t k = 0; k < out.size(); k += 2) {
      double a, b;
      gen.normal_pair(a, b);
      out[k] = a;
      if (k + 1 < out.size()) out[k + 1] = b;
    }
    for (double v : out) norm2 += v * v;
    if (norm2 > 1e-300) {
      double inv = 1.0 / std::sqrt(norm2);
      for (double& v : out) v *= inv;
      return;
    }
  }
}

inline bool in_open_cube(std::span<const double> x) {
  for (double v : x)
    if (!(v > 0.0 && v < 1.0)) return false;
  return true;
}

}  // namespace detail

// Monte Carlo estimate of phi_bar_eps(x): z uniform in B(x,eps), averaging
// 1{z in D, z on the opposite side of the boundary from x}, rescaled by
// alpha_d / eps.  Exactly zero (no sampling) when |signed_distance| > eps.
inline McValue phi_bar_numeric(const Shape& shape, std::span<const double> x, double eps,
                               std::int64_t m, std::uint64_t seed) {
  if (!(eps > 0.0)) throw ArgumentError("phi_bar_numeric: eps > 0 required");
  if (m < 1) throw ArgumentError("phi_bar_numeric: m >= 1 required");
  const int d = shape.dim();
  if (std::fabs(shape.signed_distance(x)) > eps) return {0.0, 0.0};
  SplitMix64 gen(seed);
  const bool inside = shape.contains(x);
  std::vector<double> dir(d), z(d);
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < m; ++s) {
    detail::unit_vector(gen, dir);
    double r = eps * std::pow(gen.uniform_open(), 1.0 / d);
    for (int k = 0; k < d; ++k) z[k] = x[k] + r * dir[k];
    if (detail::in_open_cube(z) && shape.contains(z) != inside) ++hits;
  }
  double p = static_cast<double>(hits) / static_cast<double>(m);
  double scale = unit_ball_volume(d) / eps;
  McValue out;
  out.value = scale * p;
  out.std_error = scale * std::sqrt(p * (1.0 - p) / static_cast<double>(m));
  return out;
}

namespace detail {

inline bool exact_profile_applicable(const Shape& shape, double eps) {
  if (shape.as_slab() != nullptr) return eps <= 1.0;
  if (const Ball* b = shape.as_ball())
    return (shape.dim() == 2 || shape.dim() == 3) &&
           (b->radius == 0.0 || shape.dist_to_domain_boundary() > eps);
  return false;
}

// P_eps of an interior ball: layer integral over depth t in [0, min(eps,R)],
// |B(x,eps) \ ball| * sphere_area(R - t).
inline double nonlocal_exact_ball(const Ball& ball, int d, double eps, double tol) {
  const double R = ball.radius;
  const double tmax = std::min(eps, R);
  if (tmax <= 0.0) return 0.0;
  const double ball_eps = unit_ball_volume(d) * std::pow(eps, d);
  const double layer = d * unit_ball_volume(d);  // sphere area prefactor
  auto f = [&](double t) {
    double rho = R - t;
    double outside = ball_eps - ball_intersection_volume(d, eps, R, rho);
    return std::max(0.0, outside) * layer * std::pow(rho, d - 1);
  };
  double inner_tol = 0.5 * tol * std::pow(eps, d + 1);
  double integral = adaptive_simpson(f, 0.0, tmax, inner_tol);
  return 2.0 * integral / std::pow(eps, d + 1);
}

// P_eps of an axis slab in the cube, exactly:
//   P = 2 eps^{-(d+1)} int_0^eps L(w) G_{d-1}(sqrt(eps^2 - w^2)) dw
// where w is the axis gap, L(w) the length of admissible axis positions
// (clamped at the cube faces), and G the exact cube-pair overlap kernel.
// Substituting w = eps*sin(psi) removes the endpoint square root.
inline double nonlocal_exact_slab(const AxisSlab& slab, int d, double eps, double tol) {
  const double theta = slab.threshold;
  auto length = [&](double w) {
    return std::max(0.0, std::min(w, theta) - std::max(0.0, w - (1.0 - theta)));
  };
  auto f = [&](double psi) {
    double w = eps * std::sin(psi);
    double r = eps * std::cos(psi);
    return length(w) * cube_pair_volume(d - 1, r) * eps * std::cos(psi);
  };
  std::initializer_list<double> breaks = {
      theta < eps ? std::asin(theta / eps) : -1.0,
      1.0 - theta < eps ? std::asin((1.0 - theta) / eps) : -1.0};
  double inner_tol = 0.5 * tol * std::pow(eps, d + 1);
  double integral =
      adaptive_simpson_split(f, 0.0, 0.5 * std::numbers::pi, breaks, inner_tol);
  return 2.0 * integral / std::pow(eps, d + 1);
}

}  // namespace detail

inline NonlocalEstimate nonlocal_perimeter(const Shape& shape, double eps,
                                           const NonlocalBudget& budget = {},
                                           std::uint64_t seed = 0x6e6c7065726dull) {
  if (!(eps > 0.0)) throw ArgumentError("nonlocal_perimeter: eps > 0 required");
  const int d = shape.dim();

  if (!budget.force_monte_carlo && detail::exact_profile_applicable(shape, eps)) {
    NonlocalEstimate est;
    est.method = NonlocalMethod::exact_profile;
    est.error_bound = budget.quad_tol;
    if (const Ball* b = shape.as_ball())
      est.value = detail::nonlocal_exact_ball(*b, d, eps, budget.quad_tol);
    else
      est.value = detail::nonlocal_exact_slab(*shape.as_slab(), d, eps, budget.quad_tol);
    return est;
  }

  // Monte Carlo over the inner half-tube.
  SplitMix64 gen(seed);
  const std::int64_t M = budget.outer_samples;
  const bool exact_phi = !budget.force_numeric_phi && shape.has_exact_profile() &&
                         shape.dist_to_domain_boundary() > eps;

  double volume = 0.0;
  std::vector<double> x(d);
  std::vector<double> terms;
  terms.reserve(M);

  auto phi_eval = [&](std::span<const double> pt, std::int64_t i) {
    if (exact_phi) return phi_bar_exact(shape, pt, eps);
    return phi_bar_numeric(shape, pt, eps, budget.inner_samples,
                           spawn_trial_seed(seed, i))
        .value;
  };

  if (const Ball* b = shape.as_ball()) {
    const double R = b->radius;
    const double r0 = std::max(0.0, R - eps);
    volume = unit_ball_volume(d) * (std::pow(R, d) - std::pow(r0, d));
    if (volume <= 0.0) return {0.0, 0.0, NonlocalMethod::monte_carlo, false};
    std::vector<double> dir(d);
    for (std::int64_t i = 0; i < M; ++i) {
      detail::unit_vector(gen, dir);
      double u = gen.uniform_open();
      double r = std::pow(std::pow(r0, d) + u * (std::pow(R, d) - std::pow(r0, d)),
                          1.0 / d);
      for (int k = 0; k < d; ++k) x[k] = b->center[k] + r * dir[k];
      terms.push_back(detail::in_open_cube(x) ? phi_eval(x, i) : 0.0);
    }
  } else if (const AxisSlab* sl = shape.as_slab()) {
    const double h = std::min(eps, sl->threshold);
    volume = h;
    for (std::int64_t i = 0; i < M; ++i) {
      for (int k = 0; k < d; ++k) x[k] = gen.uniform_open();
      x[sl->axis] = sl->threshold - h * gen.uniform_open();
      terms.push_back(phi_eval(x, i));
    }
  } else {
    const Box& bx = *shape.as_box();
    volume = 1.0;
    for (int k = 0; k < d; ++k) volume *= bx.hi[k] - bx.lo[k];
    for (std::int64_t i = 0; i < M; ++i) {
      for (int k = 0; k < d; ++k)
        x[k] = bx.lo[k] + (bx.hi[k] - bx.lo[k]) * gen.uniform_open();
      bool in_tube = -shape.signed_distance(x) <= eps;  // x is inside the box
      terms.push_back(in_tube ? phi_eval(x, i) : 0.0);
    }
  }

  SampleMoments m = sample_moments(terms);
  NonlocalEstimate est;
  est.method = NonlocalMethod::monte_carlo;
  est.value = 2.0 * volume * m.mean;
  est.error_bound = 3.0 * 2.0 * volume * standard_error(m);
  est.budget_warning =
      budget.mc_target_error > 0.0 && est.error_bound > budget.mc_target_error;
  return est;
}

struct BiasRow {
  double eps = 0.0;
  double p_eps = 0.0;
  double bias = 0.0;
  double abs_bias = 0.0;
  double error_bound = 0.0;
  NonlocalMethod method = NonlocalMethod::exact_profile;
  bool used_in_fit = false;
};

struct BiasCurve {
  std::vector<BiasRow> rows;
  double slope = 0.0;
  double sigma_per = 0.0;  // sigma_d * Per(set), the limit value
};

// Bias table and fitted log-log slope of |bias| vs eps.  Rows whose |bias|
// is within 2x the evaluation error bound are excluded from the fit.
inline BiasCurve bias_curve(const Shape& shape, std::span<const double> eps_list,
                            const NonlocalBudget& budget = {},
                            std::uint64_t seed = 0x62696173ull) {
  std::vector<double> distinct(eps_list.begin(), eps_list.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3)
    throw ArgumentError("bias_curve: >= 3 distinct eps values required");

  BiasCurve curve;
  curve.sigma_per = surface_tension(shape.dim()) * shape.exact_perimeter();
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    NonlocalEstimate est =
        nonlocal_perimeter(shape, eps_list[i], budget,
                           spawn_trial_seed(seed, static_cast<std::int64_t>(i)));
    BiasRow row;
    row.eps = eps_list[i];
    row.p_eps = est.value;
    row.bias = est.value - curve.sigma_per;
    row.abs_bias = std::fabs(row.bias);
    row.error_bound = est.error_bound;
    row.method = est.method;
    row.used_in_fit = row.abs_bias > 2.0 * row.error_bound;
    curve.rows.push_back(row);
  }

  std::vector<double> lx, ly;
  for (const BiasRow& r : curve.rows)
    if (r.used_in_fit) {
      lx.push_back(std::log(r.eps));
      ly.push_back(std::log(r.abs_bias));
    }
  if (lx.size() < 2)
    throw InsufficientSignalError("bias_curve: fewer than 2 points above the noise floor");
  curve.slope = fit_line(lx, ly).slope;
  return curve;
}

}  // namespace gcperim
