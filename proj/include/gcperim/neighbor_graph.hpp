#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "gcperim/errors.hpp"
#include "gcperim/sampling.hpp"

// Crossing-edge counts and graph perimeter of the eps-graph.  Two paths:
// an O(n^2) reference and a cell-grid path (cells of side exactly eps,
// occupied cells kept sparse via a sort, 3^d neighborhood scanned once per
// unordered cell pair).  Distance comparisons use squared norms; the closed
// inequality ||xi - xj|| <= eps is preserved exactly.

namespace gcperim {

struct CutResult {
  std::int64_t edge_count = 0;
  double gper = 0.0;
  std::int64_t n = 0;
  double eps = 0.0;
};

struct DegreeStats {
  double mean_degree = 0.0;
  std::int64_t max_degree = 0;
};

namespace detail {

inline double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

// Visits every unordered pair {i,j} with ||xi-xj|| <= eps.  pre(i,j) is a
// cheap filter evaluated before the distance test.
template <class Pre, class Fn>
void naive_pairs(const LabeledCloud& c, double eps, Pre&& pre, Fn&& fn) {
  const double e2 = eps * eps;
  for (std::int64_t i = 0; i < c.n; ++i)
    for (std::int64_t j = i + 1; j < c.n; ++j)
      if (pre(i, j) && dist2(c.point(i), c.point(j)) <= e2) fn(i, j);
}

template <class Pre, class Fn>
void grid_pairs(const LabeledCloud& c, double eps, Pre&& pre, Fn&& fn) {
  const int d = c.d;
  const std::int64_t n = c.n;
  const double e2 = eps * eps;
  const std::int64_t m = static_cast<std::int64_t>(std::floor(1.0 / eps)) + 1;

  // Linear cell ids must stay below 2^63; otherwise the reference path runs.
  long double id_span = 1.0L;
  for (int k = 0; k < d; ++k) id_span *= static_cast<long double>(m);
  if (id_span > 9.0e18L) {
    naive_pairs(c, eps, pre, fn);
    return;
  }

  std::vector<std::uint64_t> stride(d);
  std::uint64_t s = 1;
  for (int k = 0; k < d; ++k) {
    stride[k] = s;
    s *= static_cast<std::uint64_t>(m);
  }

  std::vector<std::int32_t> cell(static_cast<std::size_t>(n) * d);
  std::vector<std::uint64_t> id(n);
  for (std::int64_t i = 0; i < n; ++i) {
    std::uint64_t cid = 0;
    for (int k = 0; k < d; ++k) {
      auto q = static_cast<std::int64_t>(c.points[i * d + k] / eps);
      q = std::clamp<std::int64_t>(q, 0, m - 1);
      cell[i * d + k] = static_cast<std::int32_t>(q);
      cid += static_cast<std::uint64_t>(q) * stride[k];
    }
    id[i] = cid;
  }

  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), std::int64_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::int64_t a, std::int64_t b) { return id[a] < id[b] || (id[a] == id[b] && a < b); });

  // occupied-cell runs over the sorted order
  std::vector<std::int64_t> run_begin;
  std::vector<std::uint64_t> run_id;
  for (std::int64_t p = 0; p < n; ++p)
    if (p == 0 || id[order[p]] != id[order[p - 1]]) {
      run_begin.push_back(p);
      run_id.push_back(id[order[p]]);
    }
  run_begin.push_back(n);
  const std::int64_t runs = static_cast<std::int64_t>(run_id.size());

  // Half of the 3^d - 1 neighbor offsets: keep those whose first nonzero
  // component is +1, so each unordered cell pair is visited exactly once.
  std::vector<std::vector<int>> offsets;
  std::vector<int> delta(d, -1);
  for (;;) {
    int first_nonzero = 0;
    for (int k = 0; k < d; ++k)
      if (delta[k] != 0) {
        first_nonzero = delta[k];
        break;
      }
    if (first_nonzero == 1) offsets.push_back(delta);
    int k = 0;
    while (k < d && delta[k] == 1) delta[k++] = -1;
    if (k == d) break;
    ++delta[k];
  }

  for (std::int64_t r = 0; r < runs; ++r) {
    const std::int64_t b0 = run_begin[r], b1 = run_begin[r + 1];
    for (std::int64_t a = b0; a < b1; ++a)
      for (std::int64_t b = a + 1; b < b1; ++b) {
        std::int64_t i = order[a], j = order[b];
        if (pre(i, j) && dist2(c.point(i), c.point(j)) <= e2) fn(i, j);
      }
    const std::int32_t* base = &cell[order[b0] * d];
    for (const auto& off : offsets) {
      bool in_range = true;
      std::uint64_t nid = 0;
      for (int k = 0; k < d; ++k) {
        std::int64_t q = base[k] + off[k];
        if (q < 0 || q >= m) {
          in_range = false;
          break;
        }
        nid += static_cast<std::uint64_t>(q) * stride[k];
      }
      if (!in_range) continue;
      auto it = std::lower_bound(run_id.begin(), run_id.end(), nid);
      if (it == run_id.end() || *it != nid) continue;
      std::int64_t rr = it - run_id.begin();
      for (std::int64_t a = b0; a < b1; ++a)
        for (std::int64_t b = run_begin[rr]; b < run_begin[rr + 1]; ++b) {
          std::int64_t i = order[a], j = order[b];
          if (pre(i, j) && dist2(c.point(i), c.point(j)) <= e2) fn(i, j);
        }
    }
  }
}

}  // namespace detail

// O(n^2) reference: unordered pairs with opposite labels within distance eps.
inline std::int64_t cut_count_naive(const LabeledCloud& cloud, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("cut_count_naive: eps > 0 required");
  std::int64_t count = 0;
  detail::naive_pairs(
      cloud, eps, [&](std::int64_t i, std::int64_t j) { return cloud.labels[i] != cloud.labels[j]; },
      [&](std::int64_t, std::int64_t) { ++count; });
  return count;
}

// Cell-grid path; identical value to cut_count_naive on every input.  Falls
// back to the reference loop when eps >= 1/3 (the grid degenerates).
inline std::int64_t cut_count_grid(const LabeledCloud& cloud, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("cut_count_grid: eps > 0 required");
  std::int64_t count = 0;
  auto mixed = [&](std::int64_t i, std::int64_t j) { return cloud.labels[i] != cloud.labels[j]; };
  auto tally = [&](std::int64_t, std::int64_t) { ++count; };
  if (eps >= 1.0 / 3.0)
    detail::naive_pairs(cloud, eps, mixed, tally);
  else
    detail::grid_pairs(cloud, eps, mixed, tally);
  return count;
}

// Every crossing pair has both endpoints within eps of the set boundary, so
// counting on the |signed_distance| <= eps subset gives the same value at a
// fraction of the candidate pairs.  Requires labels consistent with shape.
inline std::int64_t cut_count_tube(const LabeledCloud& cloud, const Shape& shape, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("cut_count_tube: eps > 0 required");
  if (shape.dim() != cloud.d) throw ArgumentError("cut_count_tube: dimension mismatch");
  LabeledCloud sub;
  sub.d = cloud.d;
  sub.seed = cloud.seed;
  for (std::int64_t i = 0; i < cloud.n; ++i) {
    if (std::fabs(shape.signed_distance(cloud.point(i))) > eps) continue;
    auto p = cloud.point(i);
    sub.points.insert(sub.points.end(), p.begin(), p.end());
    sub.labels.push_back(cloud.labels[i]);
  }
  sub.n = static_cast<std::int64_t>(sub.labels.size());
  return cut_count_grid(sub, eps);
}

inline CutResult graph_perimeter(const LabeledCloud& cloud, double eps) {
  if (cloud.n < 2) throw ArgumentError("graph_perimeter: n >= 2 required");
  if (!(eps > 0.0)) throw ArgumentError("graph_perimeter: eps > 0 required");
  CutResult r;
  r.n = cloud.n;
  r.eps = eps;
  r.edge_count = cut_count_grid(cloud, eps);
  r.gper = 2.0 * static_cast<double>(r.edge_count) /
           (static_cast<double>(cloud.n) * static_cast<double>(cloud.n - 1) *
            std::pow(eps, cloud.d + 1));
  return r;
}

inline DegreeStats degree_stats(const LabeledCloud& cloud, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("degree_stats: eps > 0 required");
  DegreeStats st;
  if (cloud.n == 0) return st;
  std::vector<std::int64_t> deg(cloud.n, 0);
  auto all = [](std::int64_t, std::int64_t) { return true; };
  auto bump = [&](std::int64_t i, std::int64_t j) {
    ++deg[i];
    ++deg[j];
  };
  if (eps >= 1.0 / 3.0)
    detail::naive_pairs(cloud, eps, all, bump);
  else
    detail::grid_pairs(cloud, eps, all, bump);
  std::int64_t total = 0;
  for (std::int64_t v : deg) {
    total += v;
    st.max_degree = std::max(st.max_degree, v);
  }
  st.mean_degree = static_cast<double>(total) / static_cast<double>(cloud.n);
  return st;
}

}  // namespace gcperim
