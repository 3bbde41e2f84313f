#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include "gcperim/constants.hpp"
#include "gcperim/quadrature.hpp"
#include "gcperim/rng.hpp"
#include "gcperim/stats.hpp"

using namespace gcperim;

namespace {

constexpr double kPi = std::numbers::pi;

// Uniform point in the unit d-ball: random direction times U^{1/d}.
void ball_point(SplitMix64& gen, std::vector<double>& z) {
  const int d = static_cast<int>(z.size());
  for (;;) {
    double norm2 = 0.0;
    for (int k = 0; k < d; k += 2) {
      double a, b;
      gen.normal_pair(a, b);
      z[k] = a;
      if (k + 1 < d) z[k + 1] = b;
    }
    for (double v : z) norm2 += v * v;
    if (norm2 > 1e-300) {
      double r = std::pow(gen.uniform_open(), 1.0 / d) / std::sqrt(norm2);
      for (double& v : z) v *= r;
      return;
    }
  }
}

// Monte Carlo oracle for the integral of |z_1| over the unit ball.
std::pair<double, double> mc_abs_z1(int d, std::int64_t samples, std::uint64_t seed) {
  SplitMix64 gen(seed);
  std::vector<double> z(d);
  KahanSum sum, sumsq;
  for (std::int64_t i = 0; i < samples; ++i) {
    ball_point(gen, z);
    double v = std::fabs(z[0]) * unit_ball_volume(d);
    sum.add(v);
    sumsq.add(v * v);
  }
  double n = static_cast<double>(samples);
  double mean = sum.value() / n;
  double var = (sumsq.value() / n - mean * mean) * n / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

double circle_cap_area(double t) { return std::acos(t) - t * std::sqrt(1.0 - t * t); }
double sphere_cap_volume(double t) { return kPi * (1.0 - t) * (1.0 - t) * (2.0 + t) / 3.0; }

}  // namespace

TEST_CASE("unit ball volume closed form") {
  CHECK(unit_ball_volume(1) == Approx(2.0).epsilon(1e-14));
  CHECK(unit_ball_volume(2) == Approx(kPi).epsilon(1e-14));
  CHECK(unit_ball_volume(3) == Approx(4.0 * kPi / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(unit_ball_volume(0), ArgumentError);
}

TEST_CASE("surface tension closed form and integral form") {
  CHECK(surface_tension(2) == Approx(4.0 / 3.0).margin(1e-12));
  CHECK(surface_tension(3) == Approx(kPi / 2.0).margin(1e-12));

  SECTION("Monte Carlo integral of |z1| over the ball, d = 2..8") {
    for (int d = 2; d <= 8; ++d) {
      auto [mc, se] = mc_abs_z1(d, 2000000, 0x5151u + d);
      double sigma = surface_tension(d);
      CHECK(sigma > 0.0);
      INFO("d=" << d << " mc=" << mc << " se=" << se << " sigma=" << sigma);
      CHECK(std::fabs(mc - sigma) <= 3.0 * se);
    }
  }
}

TEST_CASE("cap volume") {
  SECTION("hemisphere and empty cap") {
    for (int d = 2; d <= 6; ++d) {
      CHECK(cap_volume(d, 0.0) == Approx(unit_ball_volume(d) / 2.0).margin(1e-11));
      CHECK(cap_volume(d, 1.0) == 0.0);
    }
  }
  SECTION("d=2 circular segment closed form") {
    CHECK(cap_volume(2, 0.5) == Approx(circle_cap_area(0.5)).margin(1e-9));
    for (double t : {0.1, 0.3, 0.7, 0.9})
      CHECK(cap_volume(2, t) == Approx(circle_cap_area(t)).margin(1e-11));
  }
  SECTION("d=3 spherical cap closed form") {
    for (double t : {0.0, 0.2, 0.5, 0.8})
      CHECK(cap_volume(3, t) == Approx(sphere_cap_volume(t)).margin(1e-11));
  }
  SECTION("strictly decreasing in t") {
    for (int d : {2, 4}) {
      double prev = cap_volume(d, 0.0);
      for (int i = 1; i <= 20; ++i) {
        double cur = cap_volume(d, i / 20.0);
        CHECK(cur < prev);
        prev = cur;
      }
    }
  }
  CHECK_THROWS_AS(cap_volume(2, -0.1), ArgumentError);
  CHECK_THROWS_AS(cap_volume(2, 1.1), ArgumentError);
}

TEST_CASE("variance constant") {
  SECTION("bounds") {
    for (int d = 2; d <= 6; ++d) {
      double cd = variance_constant(d);
      double a = unit_ball_volume(d);
      CHECK(cd > 0.0);
      CHECK(cd < a * a / 2.0);
    }
  }
  SECTION("d=2 against Monte Carlo over t with the independent segment form") {
    SplitMix64 gen(0xCD02u);
    KahanSum sum, sumsq;
    const std::int64_t m = 10000000;
    for (std::int64_t i = 0; i < m; ++i) {
      double a = circle_cap_area(gen.uniform_open());
      double v = 2.0 * a * a;
      sum.add(v);
      sumsq.add(v * v);
    }
    double n = static_cast<double>(m);
    double mean = sum.value() / n;
    double se = std::sqrt((sumsq.value() / n - mean * mean) / n);
    INFO("mc=" << mean << " se=" << se << " quad=" << variance_constant(2));
    CHECK(std::fabs(variance_constant(2) - mean) <= 3.0 * se);
  }
  SECTION("d=3,4 against Monte Carlo over t") {
    for (int d : {3, 4}) {
      SplitMix64 gen(0xCD00u + d);
      KahanSum sum, sumsq;
      const std::int64_t m = 200000;
      for (std::int64_t i = 0; i < m; ++i) {
        double a = d == 3 ? sphere_cap_volume(gen.uniform_open())
                          : cap_volume(4, gen.uniform_open());
        double v = 2.0 * a * a;
        sum.add(v);
        sumsq.add(v * v);
      }
      double n = static_cast<double>(m);
      double mean = sum.value() / n;
      double se = std::sqrt((sumsq.value() / n - mean * mean) / n);
      INFO("d=" << d << " mc=" << mean << " se=" << se);
      CHECK(std::fabs(variance_constant(d) - mean) <= 3.0 * se);
    }
  }
}

TEST_CASE("variance constant cache under concurrent first use") {
  std::vector<double> results(4, 0.0);
  std::vector<std::thread> pool;
  for (int w = 0; w < 4; ++w)
    pool.emplace_back([&results, w] { results[w] = variance_constant(5); });
  for (auto& t : pool) t.join();
  for (int w = 1; w < 4; ++w) CHECK(results[w] == results[0]);
  CHECK(results[0] == variance_constant(5));
}

TEST_CASE("rate function and regimes") {
  SECTION("dense example") {
    auto rc = rate_f(1000000, 0.01, 2);
    CHECK(rc.regime == Regime::dense);
    CHECK(rc.f_value == Approx(0.01).epsilon(1e-12));
  }
  SECTION("sparse example") {
    auto rc = rate_f(1000000, 0.01, 4);
    CHECK(rc.regime == Regime::sparse);
    CHECK(rc.f_value == Approx(0.1).epsilon(1e-12));
  }
  SECTION("boundary eps = n^{-1/d} is dense and both branches agree") {
    std::int64_t n = 1000000;
    double eps = std::pow(static_cast<double>(n), -0.5);
    auto rc = rate_f(n, eps, 2);
    CHECK(rc.regime == Regime::dense);
    CHECK(rc.f_value == Approx(1.0 / std::sqrt(1000.0)).epsilon(1e-12));
    double sparse_branch = 1.0 / (n * std::pow(eps, 1.5));
    CHECK(rc.f_value == Approx(sparse_branch).epsilon(1e-9));
  }
  SECTION("continuity at the boundary for several (n, d)") {
    for (int d : {2, 3, 5}) {
      for (std::int64_t n : {5000, 200000}) {
        double eps = std::pow(static_cast<double>(n), -1.0 / d);
        double dense = 1.0 / std::sqrt(n * eps);
        double sparse = 1.0 / (n * std::pow(eps, 0.5 * (d + 1)));
        CHECK(dense == Approx(sparse).epsilon(1e-9));
      }
    }
  }
  SECTION("below threshold flagged") {
    auto rc = rate_f(1000000, 1e-5, 2);
    CHECK(rc.regime == Regime::below_threshold);
  }
}

TEST_CASE("optimal epsilon schedules") {
  CHECK(optimal_epsilon(1000000, 2, false) == Approx(1e-2).epsilon(1e-12));
  CHECK(optimal_epsilon(100000000000LL, 6, true) == Approx(1e-4).epsilon(1e-9));
  CHECK(optimal_epsilon(12345, 3, false) ==
        Approx(std::pow(12345.0, -2.0 / 6.0)).epsilon(1e-12));
  CHECK(optimal_epsilon(99999, 5, true) ==
        Approx(std::pow(99999.0, -4.0 / 10.0)).epsilon(1e-12));
}

TEST_CASE("normal quantile") {
  SECTION("against numeric integration of the density") {
    // oracle: integrate the density on [0, z] by Simpson and bisect
    auto cdf_quad = [](double z) {
      return 0.5 + adaptive_simpson(
                       [](double x) {
                         return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
                       },
                       0.0, z, 1e-12);
    };
    auto quantile_quad = [&](double alpha) {
      double lo = 0.0, hi = 8.0;
      while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        (cdf_quad(mid) < 1.0 - alpha ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    };
    CHECK(z_quantile(0.025) == Approx(quantile_quad(0.025)).margin(1e-7));
    CHECK(z_quantile(0.05) == Approx(quantile_quad(0.05)).margin(1e-7));
    CHECK(z_quantile(0.025) == Approx(1.95996).margin(1e-5));
    CHECK(z_quantile(0.05) == Approx(1.64485).margin(1e-5));
  }
  SECTION("strictly decreasing in alpha, small near 0.5") {
    double prev = z_quantile(0.001);
    for (double a : {0.01, 0.05, 0.1, 0.25, 0.49, 0.4999}) {
      double z = z_quantile(a);
      CHECK(z < prev);
      prev = z;
    }
    CHECK(z_quantile(0.4999) > 0.0);
    CHECK(z_quantile(0.4999) < 1e-3);
  }
  CHECK_THROWS_AS(z_quantile(0.0), ArgumentError);
  CHECK_THROWS_AS(z_quantile(0.5), ArgumentError);
}

TEST_CASE("cube pair volume") {
  SECTION("m=1 closed form 2r - r^2") {
    for (double r : {0.0, 0.2, 0.5, 1.0})
      CHECK(cube_pair_volume(1, r) == Approx(2.0 * r - r * r).margin(1e-12));
  }
  SECTION("Monte Carlo pair sampling, m = 1..3") {
    SplitMix64 gen(0x6d63u);
    for (int m = 1; m <= 3; ++m) {
      for (double r : {0.15, 0.4, 0.8}) {
        const std::int64_t trials = 400000;
        std::int64_t hits = 0;
        for (std::int64_t i = 0; i < trials; ++i) {
          double s = 0.0;
          for (int k = 0; k < m; ++k) {
            double w = gen.uniform() - gen.uniform();
            s += w * w;
          }
          if (s <= r * r) ++hits;
        }
        double p = static_cast<double>(hits) / trials;
        double se = binomial_se(p, trials);
        INFO("m=" << m << " r=" << r);
        CHECK(std::fabs(cube_pair_volume(m, r) - p) <= 3.5 * se + 1e-9);
      }
    }
  }
}
