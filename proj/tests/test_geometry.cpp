#include <catch2/catch.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "gcperim/geometry.hpp"
#include "gcperim/nonlocal.hpp"
#include "gcperim/rng.hpp"

using namespace gcperim;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> pt(std::initializer_list<double> xs) { return std::vector<double>(xs); }
}  // namespace

TEST_CASE("domain") {
  CHECK(Domain(2).d == 2);
  CHECK(Domain(6).d == 6);
  CHECK_THROWS_AS(Domain(1), ArgumentError);
}

TEST_CASE("membership") {
  Shape ball = Shape::ball({0.5, 0.5}, 0.25);
  CHECK(ball.contains(pt({0.5, 0.5})));
  CHECK_FALSE(ball.contains(pt({0.76, 0.5})));
  CHECK(ball.contains(pt({0.75, 0.5})));  // closed-set convention

  Shape slab = Shape::slab(2, 0, 0.5);
  CHECK(slab.contains(pt({0.48, 0.9})));
  CHECK(slab.contains(pt({0.5, 0.1})));
  CHECK_FALSE(slab.contains(pt({0.51, 0.1})));

  Shape box = Shape::box({0.2, 0.2}, {0.6, 0.8});
  CHECK(box.contains(pt({0.2, 0.5})));
  CHECK_FALSE(box.contains(pt({0.19, 0.5})));

  std::vector<double> wrong{0.5, 0.5, 0.5};
  CHECK_THROWS_AS(ball.contains(wrong), ArgumentError);
}

TEST_CASE("exact relative perimeter") {
  CHECK(Shape::slab(2, 0, 0.5).exact_perimeter() == Approx(1.0));
  CHECK(Shape::ball({0.5, 0.5}, 0.25).exact_perimeter() == Approx(kPi / 2.0));
  CHECK(Shape::ball({0.5, 0.5, 0.5}, 0.25).exact_perimeter() == Approx(kPi / 4.0));
  CHECK(Shape::slab(5, 2, 0.3).exact_perimeter() == Approx(1.0));

  // interior box: full surface; box with two faces on the cube boundary
  CHECK(Shape::box({0.25, 0.25}, {0.75, 0.75}).exact_perimeter() == Approx(2.0));
  CHECK(Shape::box({0.0, 0.25}, {0.5, 0.75}).exact_perimeter() == Approx(1.5));
  CHECK(Shape::box({0.0, 0.0}, {0.5, 0.5}).exact_perimeter() == Approx(1.0));
}

TEST_CASE("signed distance") {
  Shape ball = Shape::ball({0.5, 0.5}, 0.25);
  CHECK(ball.signed_distance(pt({0.5, 0.5})) == Approx(-0.25));
  CHECK(ball.signed_distance(pt({0.75, 0.5})) == Approx(0.0).margin(1e-15));

  Shape slab = Shape::slab(2, 0, 0.5);
  CHECK(slab.signed_distance(pt({0.7, 0.3})) == Approx(0.2));
  CHECK(slab.signed_distance(pt({0.5, 0.9})) == Approx(0.0).margin(1e-15));

  Shape box = Shape::box({0.2, 0.2}, {0.6, 0.8});
  CHECK(box.signed_distance(pt({0.4, 0.5})) == Approx(-0.2));
  CHECK(box.signed_distance(pt({0.7, 0.5})) == Approx(0.1));
  CHECK(box.signed_distance(pt({0.7, 0.9})) == Approx(std::sqrt(0.01 + 0.01)));

  SECTION("contains <=> signed_distance <= 0 on random points") {
    SplitMix64 gen(0x51Du);
    std::vector<Shape> shapes = {ball, slab, box, Shape::ball({0.4, 0.6, 0.5}, 0.2),
                                 Shape::box({0.1, 0.3, 0.2}, {0.5, 0.9, 0.4})};
    for (const Shape& s : shapes) {
      std::vector<double> x(s.dim());
      for (int i = 0; i < 2000; ++i) {
        for (auto& v : x) v = gen.uniform_open();
        CHECK(s.contains(x) == (s.signed_distance(x) <= 0.0));
      }
    }
  }
}

TEST_CASE("domain boundary distance and profile capability") {
  CHECK(Shape::ball({0.5, 0.5}, 0.25).dist_to_domain_boundary() == Approx(0.25));
  CHECK(Shape::slab(2, 0, 0.5).dist_to_domain_boundary() == 0.0);
  CHECK(Shape::box({0.0, 0.25}, {0.5, 0.75}).dist_to_domain_boundary() == 0.0);
  CHECK(Shape::box({0.1, 0.25}, {0.5, 0.75}).dist_to_domain_boundary() == Approx(0.1));

  CHECK(Shape::ball({0.5, 0.5}, 0.25).has_exact_profile());
  CHECK(Shape::ball({0.5, 0.5, 0.5}, 0.2).has_exact_profile());
  CHECK_FALSE(Shape::ball({0.5, 0.5, 0.5, 0.5}, 0.2).has_exact_profile());
  CHECK(Shape::slab(4, 1, 0.5).has_exact_profile());
  CHECK_FALSE(Shape::box({0.2, 0.2}, {0.6, 0.8}).has_exact_profile());
  CHECK_THROWS_AS(phi_bar_exact(Shape::box({0.2, 0.2}, {0.6, 0.8}), pt({0.2, 0.5}), 0.05),
                  CapabilityError);
}

TEST_CASE("exact profile phi_bar") {
  SECTION("slab interface point gives alpha_d/(2 eps)") {
    for (int d : {2, 3, 4}) {
      Shape slab = Shape::slab(d, 0, 0.5);
      std::vector<double> x(d, 0.5);
      for (double eps : {0.05, 0.2})
        CHECK(phi_bar_exact(slab, x, eps) ==
              Approx(unit_ball_volume(d) / (2.0 * eps)).margin(1e-9));
    }
  }
  SECTION("zero outside the tube") {
    Shape ball = Shape::ball({0.5, 0.5}, 0.25);
    CHECK(phi_bar_exact(ball, pt({0.9, 0.9}), 0.05) == 0.0);
    Shape slab = Shape::slab(2, 0, 0.5);
    CHECK(phi_bar_exact(slab, pt({0.2, 0.5}), 0.05) == 0.0);
  }
  SECTION("bounded by alpha_d/eps and nonnegative") {
    SplitMix64 gen(0xFB42u);
    Shape shapes[] = {Shape::ball({0.5, 0.5}, 0.3), Shape::slab(3, 2, 0.4),
                      Shape::ball({0.5, 0.5, 0.5}, 0.25)};
    for (const Shape& s : shapes) {
      double bound = unit_ball_volume(s.dim());
      std::vector<double> x(s.dim());
      for (int i = 0; i < 500; ++i) {
        for (auto& v : x) v = gen.uniform_open();
        double eps = 0.02 + 0.2 * gen.uniform();
        double phi = phi_bar_exact(s, x, eps);
        CHECK(phi >= 0.0);
        CHECK(phi <= bound / eps + 1e-12);
      }
    }
  }
  SECTION("slab profile is symmetric across the interface") {
    Shape slab = Shape::slab(2, 0, 0.5);
    for (double t : {0.01, 0.02, 0.04}) {
      double inner = phi_bar_exact(slab, pt({0.5 - t, 0.3}), 0.05);
      double outer = phi_bar_exact(slab, pt({0.5 + t, 0.3}), 0.05);
      CHECK(inner == Approx(outer).margin(1e-12));
    }
  }
  SECTION("ball d=2 matches the Monte Carlo profile at depth eps/2") {
    Shape ball = Shape::ball({0.5, 0.5}, 0.25);
    const double eps = 0.05;
    std::vector<double> x = pt({0.5 + 0.25 - eps / 2.0, 0.5});  // signed distance -eps/2
    McValue mc = phi_bar_numeric(ball, x, eps, 10000000, 0x9999u);
    double exact = phi_bar_exact(ball, x, eps);
    INFO("exact=" << exact << " mc=" << mc.value << " se=" << mc.std_error);
    CHECK(std::fabs(exact - mc.value) <= 3.0 * mc.std_error);
  }
}

TEST_CASE("ball intersection volume") {
  SECTION("degenerate and symmetric cases") {
    CHECK(ball_intersection_volume(2, 1.0, 1.0, 2.5) == 0.0);
    CHECK(ball_intersection_volume(2, 1.0, 0.3, 0.2) == Approx(kPi * 0.09));
    // two unit spheres at distance 1: classic 5*pi/12
    CHECK(ball_intersection_volume(3, 1.0, 1.0, 1.0) == Approx(5.0 * kPi / 12.0));
    // half overlap of equal circles at distance 0 handled by containment
    CHECK(ball_intersection_volume(2, 0.5, 0.5, 0.0) == Approx(kPi * 0.25));
  }
  SECTION("d=2 against Monte Carlo") {
    SplitMix64 gen(0x1E45u);
    double r1 = 0.6, r2 = 0.45, dist = 0.7;
    const std::int64_t m = 500000;
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < m; ++i) {
      // sample in the r1 disk centered at origin; second center at (dist, 0)
      double x, y;
      do {
        x = 2.0 * gen.uniform() - 1.0;
        y = 2.0 * gen.uniform() - 1.0;
      } while (x * x + y * y > 1.0);
      x *= r1;
      y *= r1;
      if ((x - dist) * (x - dist) + y * y <= r2 * r2) ++hits;
    }
    double p = static_cast<double>(hits) / m;
    double est = p * kPi * r1 * r1;
    double se = kPi * r1 * r1 * std::sqrt(p * (1 - p) / m);
    CHECK(std::fabs(ball_intersection_volume(2, r1, r2, dist) - est) <= 3.5 * se);
  }
}

TEST_CASE("shape grammar") {
  Shape b = parse_shape("ball 0.5 0.5 0.25", 2);
  CHECK(b.as_ball() != nullptr);
  CHECK(b.dim() == 2);
  Shape s = parse_shape("slab 2 0.3", 3);
  REQUIRE(s.as_slab() != nullptr);
  CHECK(s.as_slab()->axis == 1);
  Shape bx = parse_shape("box 0.1 0.2 0.5 0.6", 2);
  CHECK(bx.as_box() != nullptr);

  CHECK(parse_shape(shape_to_string(b), 2).exact_perimeter() == Approx(b.exact_perimeter()));

  CHECK_THROWS_AS(parse_shape("ball 0.5 0.25", 2), ConfigError);
  CHECK_THROWS_AS(parse_shape("slab 3 0.5", 2), ConfigError);
  CHECK_THROWS_AS(parse_shape("slab 0 0.5", 2), ConfigError);
  CHECK_THROWS_AS(parse_shape("box 0.5 0.5 0.2 0.6", 2), ConfigError);
  CHECK_THROWS_AS(parse_shape("cone 0.5 0.5 0.2", 2), ConfigError);
  CHECK_THROWS_AS(parse_shape("ball 0.5 0.5 0.25 junk", 2), ConfigError);
}
