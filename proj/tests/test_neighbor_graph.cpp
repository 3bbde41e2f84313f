#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "gcperim/constants.hpp"
#include "gcperim/neighbor_graph.hpp"
#include "gcperim/nonlocal.hpp"
#include "gcperim/rng.hpp"
#include "gcperim/sampling.hpp"
#include "gcperim/stats.hpp"

using namespace gcperim;

namespace {

LabeledCloud make_cloud(std::vector<double> pts, std::vector<std::uint8_t> labels, int d) {
  LabeledCloud c;
  c.d = d;
  c.n = static_cast<std::int64_t>(labels.size());
  c.points = std::move(pts);
  c.labels = std::move(labels);
  return c;
}

LabeledCloud random_label_cloud(std::int64_t n, int d, SplitMix64& gen) {
  LabeledCloud c;
  c.d = d;
  c.n = n;
  c.points.resize(n * d);
  for (auto& v : c.points) v = gen.uniform_open();
  c.labels.resize(n);
  for (auto& l : c.labels) l = gen.uniform() < 0.5 ? 0 : 1;
  return c;
}

}  // namespace

TEST_CASE("cut counting on tiny clouds") {
  auto both_true = make_cloud({0.1, 0.1, 0.2, 0.2}, {1, 1}, 2);
  CHECK(cut_count_naive(both_true, 0.5) == 0);

  auto mixed = make_cloud({0.48, 0.5, 0.52, 0.5}, {1, 0}, 2);
  CHECK(cut_count_naive(mixed, 0.1) == 1);
  CHECK(cut_count_naive(mixed, 0.03) == 0);
  CHECK(cut_count_grid(mixed, 0.1) == 1);
  CHECK(cut_count_grid(mixed, 0.03) == 0);

  // closed inequality at an exactly representable boundary distance
  auto boundary = make_cloud({0.25, 0.5, 0.5, 0.5}, {1, 0}, 2);
  CHECK(cut_count_naive(boundary, 0.25) == 1);
  CHECK(cut_count_naive(boundary, 0.2499999) == 0);

  LabeledCloud empty = make_cloud({}, {}, 2);
  CHECK(cut_count_grid(empty, 0.1) == 0);
}

TEST_CASE("grid equals naive on random instances") {
  SplitMix64 gen(0x9817u);
  for (int rep = 0; rep < 120; ++rep) {
    int d = 2 + static_cast<int>(gen.uniform() * 3.0);
    std::int64_t n = static_cast<std::int64_t>(gen.uniform() * 2000.0);
    double eps = std::pow(10.0, -3.0 + 2.7 * gen.uniform());
    LabeledCloud c = random_label_cloud(n, d, gen);
    INFO("rep=" << rep << " n=" << n << " d=" << d << " eps=" << eps);
    CHECK(cut_count_grid(c, eps) == cut_count_naive(c, eps));
  }
}

TEST_CASE("tube-filtered counting equals the full count") {
  SplitMix64 gen(0x7707u);
  for (int rep = 0; rep < 40; ++rep) {
    int d = 2 + static_cast<int>(gen.uniform() * 2.0);
    Shape shape = rep % 2 == 0
                      ? Shape::ball(std::vector<double>(d, 0.5), 0.1 + 0.25 * gen.uniform())
                      : Shape::slab(d, 0, 0.2 + 0.6 * gen.uniform());
    std::int64_t n = 50 + static_cast<std::int64_t>(gen.uniform() * 1500.0);
    double eps = std::pow(10.0, -2.5 + 2.0 * gen.uniform());
    LabeledCloud c = sample_labeled({n, d, gen.next()}, shape);
    INFO("rep=" << rep);
    CHECK(cut_count_tube(c, shape, eps) == cut_count_naive(c, eps));
  }
}

TEST_CASE("cut invariances") {
  SplitMix64 gen(0x4242u);
  LabeledCloud c = random_label_cloud(800, 2, gen);

  SECTION("label-complement symmetry") {
    LabeledCloud flipped = c;
    for (auto& l : flipped.labels) l ^= 1;
    for (double eps : {0.01, 0.05, 0.2})
      CHECK(cut_count_grid(c, eps) == cut_count_grid(flipped, eps));
  }
  SECTION("monotone in eps") {
    std::int64_t prev = 0;
    for (double eps : {0.005, 0.01, 0.02, 0.05, 0.1, 0.3, 0.5}) {
      std::int64_t cur = cut_count_grid(c, eps);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
  SECTION("all labels equal gives zero") {
    LabeledCloud same = c;
    for (auto& l : same.labels) l = 1;
    CHECK(cut_count_grid(same, 0.2) == 0);
  }
}

TEST_CASE("graph perimeter scaling") {
  auto two = make_cloud({0.48, 0.5, 0.52, 0.5}, {1, 0}, 2);
  CutResult r = graph_perimeter(two, 0.1);
  CHECK(r.edge_count == 1);
  CHECK(r.gper == Approx(1000.0));  // 2 / (2*1*0.001)

  auto one = make_cloud({0.5, 0.5}, {1}, 2);
  CHECK_THROWS_AS(graph_perimeter(one, 0.1), ArgumentError);

  SECTION("gper * eps^{d+1} stays 2*cut/(n(n-1))") {
    SplitMix64 gen(0x77u);
    LabeledCloud c = random_label_cloud(500, 3, gen);
    for (double eps : {0.02, 0.07, 0.19}) {
      CutResult g = graph_perimeter(c, eps);
      double lhs = g.gper * std::pow(eps, 4);
      double rhs = 2.0 * static_cast<double>(g.edge_count) / (500.0 * 499.0);
      CHECK(lhs == Approx(rhs).epsilon(1e-12));
    }
  }

  SECTION("mean gper over trials matches the nonlocal perimeter") {
    Shape ball = Shape::ball({0.5, 0.5}, 0.25);
    const double eps = 0.05;
    const std::int64_t trials = 200, n = 10000;
    std::vector<double> g(trials);
    for (std::int64_t t = 0; t < trials; ++t) {
      LabeledCloud c = sample_labeled({n, 2, spawn_trial_seed(31415, t)}, ball);
      g[t] = graph_perimeter(c, eps).gper;
    }
    SampleMoments m = sample_moments(g);
    NonlocalBudget budget;
    budget.quad_tol = 1e-9;
    NonlocalEstimate p = nonlocal_perimeter(ball, eps, budget);
    INFO("mean=" << m.mean << " p_eps=" << p.value << " se=" << standard_error(m));
    CHECK(std::fabs(m.mean - p.value) <= 3.0 * standard_error(m));
  }
}

TEST_CASE("degree statistics") {
  auto single = make_cloud({0.5, 0.5}, {1}, 2);
  DegreeStats s1 = degree_stats(single, 0.1);
  CHECK(s1.mean_degree == 0.0);
  CHECK(s1.max_degree == 0);

  auto pair = make_cloud({0.5, 0.5, 0.5, 0.55}, {1, 0}, 2);
  DegreeStats s2 = degree_stats(pair, 0.1);
  CHECK(s2.mean_degree == Approx(1.0));
  CHECK(s2.max_degree == 1);

  SECTION("mean degree matches the boundary-corrected expectation") {
    const std::int64_t n = 100000;
    const double eps = 0.01;
    LabeledCloud c;
    c.d = 2;
    c.n = n;
    c.points = sample_uniform({n, 2, 2024});
    c.labels.assign(n, 1);
    DegreeStats st = degree_stats(c, eps);
    // exact expectation: (n-1) * G_2(eps), the cube pair-overlap volume
    double expected = static_cast<double>(n - 1) * cube_pair_volume(2, eps);
    INFO("mean=" << st.mean_degree << " expected=" << expected);
    CHECK(st.mean_degree == Approx(expected).epsilon(0.02));
    // and within 10% of the unclipped alpha_2 n eps^2
    double unclipped = std::numbers::pi * static_cast<double>(n) * eps * eps;
    CHECK(std::fabs(st.mean_degree - unclipped) / unclipped < 0.10);
  }
}
