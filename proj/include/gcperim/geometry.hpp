#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "gcperim/constants.hpp"
#include "gcperim/errors.hpp"

// Test sets inside the open unit cube D = (0,1)^d, with exact ground truth:
// membership, signed distance to the set boundary, relative perimeter
// (portions of the boundary lying on the cube faces excluded), and, where a
// closed form exists, the exact averaged kernel profile phi_bar.

namespace gcperim {

struct Domain {
  int d;
  explicit Domain(int dim) : d(dim) {
    if (d < 2) throw ArgumentError("Domain: d >= 2 required");
  }
};

struct Ball {
  std::vector<double> center;
  double radius = 0.0;  // radius 0 is the degenerate empty set
};

struct AxisSlab {
  int axis = 0;  // 0-based; membership is x[axis] <= threshold
  double threshold = 0.5;
};

struct Box {
  std::vector<double> lo, hi;
};

class Shape {
 public:
  static Shape ball(std::vector<double> center, double radius) {
    if (center.size() < 2) throw ArgumentError("ball: dimension >= 2 required");
    if (radius < 0.0) throw ArgumentError("ball: radius >= 0 required");
    for (double c : center)
      if (!(c > 0.0 && c < 1.0)) throw ArgumentError("ball: center inside (0,1)^d required");
    Shape s;
    s.d_ = static_cast<int>(center.size());
    s.body_ = Ball{std::move(center), radius};
    return s;
  }

  static Shape slab(int d, int axis, double threshold) {
    if (d < 2) throw ArgumentError("slab: d >= 2 required");
    if (axis < 0 || axis >= d) throw ArgumentError("slab: axis out of range");
    if (!(threshold > 0.0 && threshold < 1.0))
      throw ArgumentError("slab: threshold in (0,1) required");
    Shape s;
    s.d_ = d;
    s.body_ = AxisSlab{axis, threshold};
    return s;
  }

  static Shape box(std::vector<double> lo, std::vector<double> hi) {
    if (lo.size() != hi.size() || lo.size() < 2)
      throw ArgumentError("box: matching lo/hi of dimension >= 2 required");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (!(lo[i] < hi[i])) throw ArgumentError("box: lo < hi required componentwise");
      if (lo[i] < 0.0 || hi[i] > 1.0)
        throw ArgumentError("box: contained in the closed cube required");
    }
    Shape s;
    s.d_ = static_cast<int>(lo.size());
    s.body_ = Box{std::move(lo), std::move(hi)};
    return s;
  }

  int dim() const { return d_; }
  const std::variant<Ball, AxisSlab, Box>& body() const { return body_; }
  const Ball* as_ball() const { return std::get_if<Ball>(&body_); }
  const AxisSlab* as_slab() const { return std::get_if<AxisSlab>(&body_); }
  const Box* as_box() const { return std::get_if<Box>(&body_); }

  // Closed-set convention: boundary points belong to the set.
  bool contains(std::span<const double> x) const {
    check_dim(x);
    if (const Ball* b = as_ball()) {
      double s = 0.0;
      for (int k = 0; k < d_; ++k) {
        double t = x[k] - b->center[k];
        s += t * t;
      }
      return s <= b->radius * b->radius;
    }
    if (const AxisSlab* sl = as_slab()) return x[sl->axis] <= sl->threshold;
    const Box& bx = std::get<Box>(body_);
    for (int k = 0; k < d_; ++k)
      if (x[k] < bx.lo[k] || x[k] > bx.hi[k]) return false;
    return true;
  }

  // Negative inside, positive outside, |value| = Euclidean distance to the
  // shape boundary.
  double signed_distance(std::span<const double> x) const {
    check_dim(x);
    if (const Ball* b = as_ball()) {
      double s = 0.0;
      for (int k = 0; k < d_; ++k) {
        double t = x[k] - b->center[k];
        s += t * t;
      }
      return std::sqrt(s) - b->radius;
    }
    if (const AxisSlab* sl = as_slab()) return x[sl->axis] - sl->threshold;
    const Box& bx = std::get<Box>(body_);
    double out2 = 0.0;
    double inner = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < d_; ++k) {
      double q = std::max(bx.lo[k] - x[k], x[k] - bx.hi[k]);
      if (q > 0.0)
        out2 += q * q;
      else
        inner = std::max(inner, q);
    }
    return out2 > 0.0 ? std::sqrt(out2) : inner;
  }

  // Relative perimeter in D; faces lying on the cube boundary are excluded.
  double exact_perimeter() const {
    if (const Ball* b = as_ball())
      return d_ * unit_ball_volume(d_) * std::pow(b->radius, d_ - 1);
    if (as_slab()) return 1.0;
    const Box& bx = std::get<Box>(body_);
    double total = 0.0;
    for (int j = 0; j < d_; ++j) {
      double face = 1.0;
      for (int i = 0; i < d_; ++i)
        if (i != j) face *= bx.hi[i] - bx.lo[i];
      if (bx.lo[j] != 0.0) total += face;
      if (bx.hi[j] != 1.0) total += face;
    }
    return total;
  }

  double dist_to_domain_boundary() const {
    if (const Ball* b = as_ball()) {
      double m = std::numeric_limits<double>::infinity();
      for (int k = 0; k < d_; ++k)
        m = std::min({m, b->center[k] - b->radius, 1.0 - b->center[k] - b->radius});
      return std::max(0.0, m);
    }
    if (as_slab()) return 0.0;
    const Box& bx = std::get<Box>(body_);
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < d_; ++k) m = std::min({m, bx.lo[k], 1.0 - bx.hi[k]});
    return std::max(0.0, m);
  }

  // Closed-form phi_bar exists for balls in d = 2, 3 (lens volumes) and for
  // slabs in any d (spherical caps).
  bool has_exact_profile() const {
    if (as_ball()) return d_ == 2 || d_ == 3;
    return as_slab() != nullptr;
  }

 private:
  Shape() = default;
  void check_dim(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != d_)
      throw ArgumentError("point dimension does not match shape");
  }

  int d_ = 0;
  std::variant<Ball, AxisSlab, Box> body_;
};

// Volume of the intersection of two balls with radii r1, r2 whose centers
// are dist apart; closed forms for d = 2 (circular lens) and d = 3
// (spherical lens), assembled from the two caps cut by the radical plane.
inline double ball_intersection_volume(int d, double r1, double r2, double dist) {
  if (d != 2 && d != 3)
    throw CapabilityError("ball_intersection_volume: closed form only for d in {2,3}");
  if (r1 <= 0.0 || r2 <= 0.0) return 0.0;
  if (dist >= r1 + r2) return 0.0;
  if (dist <= std::fabs(r1 - r2)) {
    double r = std::min(r1, r2);
    return unit_ball_volume(d) * std::pow(r, d);
  }
  double c1 = (dist * dist - r2 * r2 + r1 * r1) / (2.0 * dist);
  double c2 = dist - c1;
  auto cap = [d](double r, double c) {
    // region of B(0,r) beyond the hyperplane at signed offset c (|c| <= r)
    if (d == 2) {
      double cc = std::clamp(c / r, -1.0, 1.0);
      return r * r * std::acos(cc) - c * std::sqrt(std::max(0.0, r * r - c * c));
    }
    double h = std::clamp(r - c, 0.0, 2.0 * r);
    return std::numbers::pi * h * h * (3.0 * r - h) / 3.0;
  };
  return cap(r1, c1) + cap(r2, c2);
}

// Exact averaged kernel profile
//   phi_bar_eps(x) = |B(x,eps) ∩ (set on the other side of x)| / eps^{d+1},
// valid where B(x,eps) does not leave the cube.  Balls use the d=2/3 lens
// forms, slabs the spherical-cap volume; anything else raises
// CapabilityError and callers fall back to phi_bar_numeric.
inline double phi_bar_exact(const Shape& shape, std::span<const double> x, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("phi_bar_exact: eps > 0 required");
  const int d = shape.dim();
  double t = shape.signed_distance(x);
  if (std::fabs(t) > eps) return 0.0;
  if (const AxisSlab* sl = shape.as_slab()) {
    (void)sl;
    return cap_volume(d, std::fabs(t) / eps) / eps;
  }
  const Ball* b = shape.as_ball();
  if (b == nullptr || (d != 2 && d != 3))
    throw CapabilityError("phi_bar_exact: no closed form for this shape/dimension");
  if (b->radius == 0.0) return 0.0;
  double lens = ball_intersection_volume(d, eps, b->radius, b->radius + t);
  double vol = t <= 0.0 ? unit_ball_volume(d) * std::pow(eps, d) - lens : lens;
  return std::max(0.0, vol) / std::pow(eps, d + 1);
}

// Shape grammar for configs and the CLI:
//   ball cx cy [cz ...] r      (center coordinates fix the dimension)
//   slab axis threshold        (axis is 1-based)
//   box lo1 .. lod hi1 .. hid
inline Shape parse_shape(const std::string& text, int d) {
  std::istringstream in(text);
  std::string kind;
  if (!(in >> kind)) throw ConfigError("empty shape specification");
  std::vector<double> nums;
  double v;
  while (in >> v) nums.push_back(v);
  std::string tail;
  if (in.clear(), in >> tail) throw ConfigError("shape: trailing token '" + tail + "'");
  try {
    if (kind == "ball") {
      if (static_cast<int>(nums.size()) != d + 1)
        throw ConfigError("ball: expected d center coordinates plus radius");
      double r = nums.back();
      nums.pop_back();
      return Shape::ball(std::move(nums), r);
    }
    if (kind == "slab") {
      if (nums.size() != 2) throw ConfigError("slab: expected axis and threshold");
      int axis = static_cast<int>(nums[0]);
      if (axis < 1 || axis > d || nums[0] != axis)
        throw ConfigError("slab: axis must be an integer in 1..d");
      return Shape::slab(d, axis - 1, nums[1]);
    }
    if (kind == "box") {
      if (static_cast<int>(nums.size()) != 2 * d)
        throw ConfigError("box: expected d lo coordinates then d hi coordinates");
      std::vector<double> lo(nums.begin(), nums.begin() + d);
      std::vector<double> hi(nums.begin() + d, nums.end());
      return Shape::box(std::move(lo), std::move(hi));
    }
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("shape: ") + e.what());
  }
  throw ConfigError("unknown shape kind '" + kind + "'");
}

inline std::string shape_to_string(const Shape& shape) {
  auto num = [](double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  std::string out;
  if (const Ball* b = shape.as_ball()) {
    out = "ball";
    for (double c : b->center) out += " " + num(c);
    out += " " + num(b->radius);
  } else if (const AxisSlab* sl = shape.as_slab()) {
    out = "slab " + std::to_string(sl->axis + 1) + " " + num(sl->threshold);
  } else {
    const Box& bx = std::get<Box>(shape.body());
    out = "box";
    for (double c : bx.lo) out += " " + num(c);
    for (double c : bx.hi) out += " " + num(c);
  }
  return out;
}

}  // namespace gcperim
