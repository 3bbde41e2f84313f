#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gcperim/errors.hpp"

namespace gcperim {

// Compensated (Kahan) accumulator; summation order is fixed by the caller.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = sum_ + y;
    c_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

inline double kahan_total(std::span<const double> xs) {
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

struct SampleMoments {
  std::int64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased (n-1)
  double skewness = 0.0;  // adjusted Fisher-Pearson estimator
};

inline SampleMoments sample_moments(std::span<const double> xs) {
  SampleMoments m;
  m.count = static_cast<std::int64_t>(xs.size());
  if (m.count == 0) return m;
  m.mean = kahan_total(xs) / static_cast<double>(m.count);
  if (m.count < 2) return m;
  KahanSum s2, s3;
  for (double x : xs) {
    double dx = x - m.mean;
    s2.add(dx * dx);
    s3.add(dx * dx * dx);
  }
  double n = static_cast<double>(m.count);
  m.variance = s2.value() / (n - 1.0);
  if (m.count >= 3 && s2.value() > 0.0) {
    double m2 = s2.value() / n;
    double m3 = s3.value() / n;
    double g1 = m3 / std::pow(m2, 1.5);
    m.skewness = g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
  }
  return m;
}

inline double standard_error(const SampleMoments& m) {
  if (m.count < 2) return 0.0;
  return std::sqrt(m.variance / static_cast<double>(m.count));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Kolmogorov-Smirnov sup distance between the empirical CDF and N(0,1).
inline double ks_distance_vs_normal(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double f = normal_cdf(v[i]);
    d = std::max(d, std::fabs((static_cast<double>(i) + 1.0) / n - f));
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
  }
  return d;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ArgumentError("fit_line: need >= 2 matched points");
  double n = static_cast<double>(x.size());
  KahanSum sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  double mx = sx.value() / n;
  double my = sy.value() / n;
  KahanSum sxx, sxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
  }
  if (sxx.value() == 0.0) throw ArgumentError("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy.value() / sxx.value();
  f.intercept = my - f.slope * mx;
  return f;
}

inline double binomial_se(double p_hat, std::int64_t trials) {
  if (trials <= 0) return 0.0;
  return std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) / static_cast<double>(trials));
}

}  // namespace gcperim
