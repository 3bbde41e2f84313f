#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "gcperim/constants.hpp"
#include "gcperim/errors.hpp"
#include "gcperim/neighbor_graph.hpp"

// Perimeter estimate per_hat = GPer / sigma_d, the asymptotic confidence
// interval a± = (GPer ± sqrt(4 C_d Per / (n eps)) Z_{alpha/2}) / sigma_d,
// and the one-sided hypothesis test of H0: Per <= rho via
// l_n = sqrt(n eps / (4 C_d rho)) (GPer - sigma_d rho), accepted iff
// l_n <= Z_alpha.

namespace gcperim {

struct PerimeterEstimate {
  double gper = 0.0;
  double per_hat = 0.0;
  std::int64_t n = 0;
  double eps = 0.0;
  int d = 0;
};

inline PerimeterEstimate make_estimate(const CutResult& cut, int d) {
  PerimeterEstimate e;
  e.gper = cut.gper;
  e.per_hat = cut.gper / surface_tension(d);
  e.n = cut.n;
  e.eps = cut.eps;
  e.d = d;
  return e;
}

struct ConfidenceInterval {
  double a_minus = 0.0;
  double a_plus = 0.0;
  bool clamped = false;  // a_minus hit the physical floor at 0
};

// The asymptotic guarantee needs d in {2,3,4} and eps inside the window
// n^{-1/d} << eps << n^{-1/5}; outside it the formulas remain well defined
// and callers emit a warning instead of failing.
inline bool ci_window_ok(std::int64_t n, double eps, int d) {
  if (d < 2 || d > 4) return false;
  double nd = static_cast<double>(n);
  return eps > std::pow(nd, -1.0 / d) && eps < std::pow(nd, -1.0 / 5.0);
}

// per_for_width is the perimeter inside the width term: the true Per for
// validation runs, the plug-in per_hat in field use.
inline ConfidenceInterval confidence_interval(const PerimeterEstimate& est, double alpha,
                                              double per_for_width) {
  if (!(alpha > 0.0 && alpha < 0.5))
    throw ArgumentError("confidence_interval: alpha in (0,0.5) required");
  if (!(per_for_width > 0.0))
    throw ArgumentError("confidence_interval: per_for_width > 0 required");
  double sigma = surface_tension(est.d);
  double half = std::sqrt(4.0 * variance_constant(est.d) * per_for_width /
                          (static_cast<double>(est.n) * est.eps)) *
                z_quantile(0.5 * alpha);
  ConfidenceInterval ci;
  ci.a_plus = (est.gper + half) / sigma;
  double lo = (est.gper - half) / sigma;
  ci.clamped = lo < 0.0;
  ci.a_minus = std::max(0.0, lo);
  return ci;
}

inline double test_statistic(const PerimeterEstimate& est, double rho) {
  if (!(rho > 0.0)) throw ArgumentError("test_statistic: rho > 0 required");
  double scale = std::sqrt(static_cast<double>(est.n) * est.eps /
                           (4.0 * variance_constant(est.d) * rho));
  return scale * (est.gper - surface_tension(est.d) * rho);
}

struct TestDecision {
  double l_n = 0.0;
  double z_alpha = 0.0;
  bool accept = true;  // accept <=> l_n <= z_alpha
  double rho = 0.0;
  double alpha = 0.0;
};

inline TestDecision hypothesis_test(const PerimeterEstimate& est, double rho, double alpha) {
  TestDecision t;
  t.l_n = test_statistic(est, rho);
  t.z_alpha = z_quantile(alpha);
  t.accept = t.l_n <= t.z_alpha;
  t.rho = rho;
  t.alpha = alpha;
  return t;
}

}  // namespace gcperim
