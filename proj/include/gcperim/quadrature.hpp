#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <vector>

namespace gcperim {

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double m, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson with interval bisection and absolute-tolerance stopping.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol, int max_depth = 52) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a);
  double fm = f(m);
  double fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, abs_tol, max_depth);
}

// Same, with the interval pre-split at known kinks of the integrand.
template <class F>
double adaptive_simpson_split(F&& f, double a, double b, std::initializer_list<double> breaks,
                              double abs_tol, int max_depth = 52) {
  std::vector<double> pts{a};
  for (double t : breaks)
    if (t > a && t < b) pts.push_back(t);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  double tol = abs_tol / static_cast<double>(pts.size() - 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += adaptive_simpson(f, pts[i], pts[i + 1], tol, max_depth);
  return total;
}

}  // namespace gcperim
