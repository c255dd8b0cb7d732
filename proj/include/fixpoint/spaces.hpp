#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fixpoint/errors.hpp"
#include "fixpoint/numeric.hpp"

namespace fixpoint {

// Shared tolerances.
inline constexpr double kSimplexTolerance = 1e-12;     // |sum(weights) - 1|
inline constexpr double kDomainTolerance = 1e-9;       // membership slack for iterates
inline constexpr double kFixedPointTolerance = 1e-10;  // ||T(p) - p|| for declared p

/// A point of a finite-dimensional Euclidean space. Immutable after
/// construction; construction rejects empty and non-finite coordinate lists.
class Point {
 public:
  Point() = default;  // empty placeholder; every operation validates dimensions

  explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw InvalidInputError("Point: dimension must be >= 1");
    if (!all_finite(coords_)) throw InvalidInputError("Point: non-finite coordinate");
  }

  Point(std::initializer_list<double> coords) : Point(std::vector<double>(coords)) {}

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }

  bool operator==(const Point&) const = default;

 private:
  std::vector<double> coords_;
};

/// Euclidean norm. Overflow is reported, never returned as Inf.
inline double norm(const Point& x) {
  double sum = 0.0;
  for (double c : x.coords()) sum += c * c;
  double result = std::sqrt(sum);
  if (!std::isfinite(result)) throw NumericRangeError("norm: overflow");
  return result;
}

/// ||a - b|| without materializing the difference.
inline double distance(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) throw InvalidInputError("distance: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    double d = a[i] - b[i];
    sum += d * d;
  }
  double result = std::sqrt(sum);
  if (!std::isfinite(result)) throw NumericRangeError("distance: overflow");
  return result;
}

/// Checks nonnegativity and sum-to-one within kSimplexTolerance.
inline void validate_simplex(std::span<const double> weights) {
  if (weights.empty()) throw WeightError("weights: empty");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw WeightError("weights: non-finite entry");
    if (w < 0.0) throw WeightError("weights: negative entry");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw WeightError("weights: sum " + format_g17(sum) + " violates the simplex constraint");
  }
}

/// Sum of w_i * p_i over a weight simplex. Summation order is fixed
/// (input order), so results are reproducible.
inline Point convex_combine(std::span<const double> weights, std::span<const Point> points) {
  if (weights.size() != points.size()) {
    throw InvalidInputError("convex_combine: weights/points size mismatch");
  }
  if (points.empty()) throw InvalidInputError("convex_combine: empty input");
  validate_simplex(weights);
  const std::size_t d = points.front().dim();
  for (const Point& p : points) {
    if (p.dim() != d) throw InvalidInputError("convex_combine: dimension mismatch");
  }
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) out[j] += weights[i] * points[i][j];
  }
  return Point(std::move(out));
}

inline Point convex_combine(const std::vector<double>& weights, const std::vector<Point>& points) {
  return convex_combine(std::span<const double>(weights), std::span<const Point>(points));
}

// --------------------------------------------------------------------------
// Convex domains
// --------------------------------------------------------------------------

struct BoxDomain {
  std::vector<double> lo, hi;
  bool operator==(const BoxDomain&) const = default;
};

struct BallDomain {
  Point center;
  double radius = 0.0;
  bool operator==(const BallDomain&) const = default;
};

/// [lo, +inf) on the real line; the one unbounded domain kind.
struct HalflineDomain {
  double lo = 0.0;
  bool operator==(const HalflineDomain&) const = default;
};

/// A convex subset of R^d: an axis-aligned box, a Euclidean ball, or a
/// halfline. Unboundedness is an explicit state (diameter() == nullopt),
/// never a sentinel value.
class DomainSpec {
 public:
  using Shape = std::variant<BoxDomain, BallDomain, HalflineDomain>;

  static DomainSpec box(std::vector<double> lo, std::vector<double> hi) {
    if (lo.empty() || lo.size() != hi.size()) {
      throw InvalidInputError("DomainSpec: box bounds must be nonempty and of equal dimension");
    }
    if (!all_finite(lo) || !all_finite(hi)) {
      throw InvalidInputError("DomainSpec: non-finite box bound");
    }
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (lo[i] > hi[i]) throw InvalidInputError("DomainSpec: box needs lo <= hi per coordinate");
    }
    return DomainSpec(BoxDomain{std::move(lo), std::move(hi)});
  }

  /// 1-D convenience box.
  static DomainSpec interval(double lo, double hi) { return box({lo}, {hi}); }

  static DomainSpec ball(Point center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw InvalidInputError("DomainSpec: ball radius must be positive and finite");
    }
    return DomainSpec(BallDomain{std::move(center), radius});
  }

  static DomainSpec halfline(double lo) {
    if (!std::isfinite(lo)) throw InvalidInputError("DomainSpec: non-finite halfline bound");
    return DomainSpec(HalflineDomain{lo});
  }

  std::size_t dim() const {
    if (const auto* b = std::get_if<BoxDomain>(&shape_)) return b->lo.size();
    if (const auto* b = std::get_if<BallDomain>(&shape_)) return b->center.dim();
    return 1;
  }

  /// Exact diameter of the set; nullopt marks an unbounded domain.
  std::optional<double> diameter() const {
    if (const auto* b = std::get_if<BoxDomain>(&shape_)) {
      double sum = 0.0;
      for (std::size_t i = 0; i < b->lo.size(); ++i) {
        double side = b->hi[i] - b->lo[i];
        sum += side * side;
      }
      return std::sqrt(sum);
    }
    if (const auto* b = std::get_if<BallDomain>(&shape_)) return 2.0 * b->radius;
    return std::nullopt;
  }

  bool bounded() const { return diameter().has_value(); }

  const Shape& shape() const { return shape_; }

  bool operator==(const DomainSpec&) const = default;

 private:
  explicit DomainSpec(Shape shape) : shape_(std::move(shape)) {}
  Shape shape_;
};

/// Membership in K inflated by tol.
inline bool domain_contains(const DomainSpec& k, const Point& x, double tol) {
  if (x.dim() != k.dim()) throw InvalidInputError("domain_contains: dimension mismatch");
  if (const auto* b = std::get_if<BoxDomain>(&k.shape())) {
    for (std::size_t i = 0; i < x.dim(); ++i) {
      if (x[i] < b->lo[i] - tol || x[i] > b->hi[i] + tol) return false;
    }
    return true;
  }
  if (const auto* b = std::get_if<BallDomain>(&k.shape())) {
    return distance(x, b->center) <= b->radius + tol;
  }
  const auto& h = std::get<HalflineDomain>(k.shape());
  return x[0] >= h.lo - tol;
}

// --------------------------------------------------------------------------
// Uniform-convexity gauge
// --------------------------------------------------------------------------

/// The gauge g of the convex-combination inequality: g(0) = 0, strictly
/// increasing and convex. The shipped instance is g(t) = t^2, which makes the
/// inequality an identity-plus-remainder in Euclidean space.
class ConvexityFunction {
 public:
  ConvexityFunction(std::string name, std::function<double(double)> f)
      : name_(std::move(name)), f_(std::move(f)) {}

  static const ConvexityFunction& square() {
    static const ConvexityFunction g("square", [](double t) { return t * t; });
    return g;
  }

  double operator()(double t) const { return f_(t); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::function<double(double)> f_;
};

/// Grid audit of the gauge invariants: g(0)=0, strict growth, midpoint
/// convexity within 1e-12 on the sampled grid.
inline void validate_convexity_function(const ConvexityFunction& g, double t_max = 8.0,
                                        int grid = 257) {
  if (g(0.0) != 0.0) throw InvalidInputError("convexity gauge: g(0) != 0");
  double prev_t = 0.0, prev_v = 0.0;
  for (int i = 1; i < grid; ++i) {
    double t = t_max * static_cast<double>(i) / (grid - 1);
    double v = g(t);
    if (!(v > prev_v)) throw InvalidInputError("convexity gauge: not strictly increasing");
    double mid = 0.5 * (prev_t + t);
    if (g(mid) > 0.5 * (prev_v + v) + 1e-12) {
      throw InvalidInputError("convexity gauge: midpoint convexity violated");
    }
    prev_t = t;
    prev_v = v;
  }
}

}  // namespace fixpoint
