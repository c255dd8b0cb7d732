#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "fixpoint/errors.hpp"
#include "fixpoint/spaces.hpp"

namespace fixpoint {

/// Deterministic uniform source. mt19937_64 is fully specified by the
/// standard and the [0,1) mapping below uses only exact bit operations, so
/// identical seeds give identical streams everywhere.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::size_t index(std::size_t bound) {
    std::size_t i = static_cast<std::size_t>(uniform01() * static_cast<double>(bound));
    return i < bound ? i : bound - 1;
  }

 private:
  std::mt19937_64 engine_;
};

/// Points plus the index pairs an estimator should evaluate. The first
/// grid_count points are the (sorted) lattice part; the rest are uniform
/// draws.
struct SamplePlan {
  std::vector<Point> points;
  std::size_t grid_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

namespace detail {

inline std::vector<double> axis_grid(double lo, double hi, std::size_t count,
                                     std::span<const double> loci) {
  if (count < 2) count = 2;
  std::vector<double> g;
  g.reserve(count + 3 * loci.size());
  const double h = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    g.push_back(i + 1 == count ? hi : lo + h * static_cast<double>(i));
  }
  // Doubled density next to declared discontinuity loci: the extremal pairs
  // of jump maps straddle the locus at half the base spacing.
  for (double locus : loci) {
    if (locus <= lo || locus >= hi) continue;
    for (double extra : {locus - 0.5 * h, locus, locus + 0.5 * h}) {
      if (extra > lo && extra < hi) g.push_back(extra);
    }
  }
  std::sort(g.begin(), g.end());
  return g;
}

inline void box_lattice(const BoxDomain& box, std::size_t target,
                        std::span<const double> loci, std::vector<Point>& out) {
  const std::size_t d = box.lo.size();
  if (d == 1) {
    for (double v : axis_grid(box.lo[0], box.hi[0], target, loci)) out.push_back(Point({v}));
    return;
  }
  // Loci refinement is a 1-D notion; multi-dimensional lattices ignore it.
  std::size_t per_axis = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(target), 1.0 / d))));
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> coords(d);
  while (true) {
    for (std::size_t j = 0; j < d; ++j) {
      double t = static_cast<double>(idx[j]) / static_cast<double>(per_axis - 1);
      coords[j] = box.lo[j] + t * (box.hi[j] - box.lo[j]);
    }
    out.push_back(Point(coords));
    std::size_t j = 0;
    while (j < d && ++idx[j] == per_axis) idx[j++] = 0;
    if (j == d) break;
  }
}

inline BoxDomain bounding_box(const DomainSpec& region) {
  if (const auto* b = std::get_if<BoxDomain>(&region.shape())) return *b;
  const auto& ball = std::get<BallDomain>(region.shape());
  std::vector<double> lo(ball.center.dim()), hi(ball.center.dim());
  for (std::size_t i = 0; i < ball.center.dim(); ++i) {
    lo[i] = ball.center[i] - ball.radius;
    hi[i] = ball.center[i] + ball.radius;
  }
  return BoxDomain{std::move(lo), std::move(hi)};
}

inline Point uniform_point(const BoxDomain& box, SeededRng& rng) {
  std::vector<double> c(box.lo.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = rng.uniform(box.lo[i], box.hi[i]);
  return Point(std::move(c));
}

inline std::vector<Point> sample_points_impl(const DomainSpec& region, long count, SeededRng& rng,
                                             std::span<const double> loci,
                                             std::size_t* grid_count_out = nullptr) {
  if (!region.bounded()) {
    throw ConfigurationError("sampling: region is unbounded; supply a bounding box");
  }
  if (count < 2) throw InvalidInputError("sampling: need at least 2 points");
  const std::size_t grid_target = static_cast<std::size_t>((count + 1) / 2);
  const BoxDomain bbox = bounding_box(region);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(count) + 8);
  if (std::holds_alternative<BoxDomain>(region.shape())) {
    box_lattice(bbox, grid_target, loci, pts);
  } else {
    std::vector<Point> lattice;
    box_lattice(bbox, grid_target, loci, lattice);
    for (Point& p : lattice) {
      if (domain_contains(region, p, 0.0)) pts.push_back(std::move(p));
    }
  }
  if (grid_count_out != nullptr) *grid_count_out = pts.size();
  const std::size_t want_random = static_cast<std::size_t>(count) - grid_target;
  std::size_t guard = 0;
  const std::size_t guard_max = 1000 * (want_random + 1);
  for (std::size_t have = 0; have < want_random;) {
    Point p = uniform_point(bbox, rng);
    if (++guard > guard_max) {
      throw ConfigurationError("sampling: rejection sampling failed to fill the region");
    }
    if (!domain_contains(region, p, 0.0)) continue;
    pts.push_back(std::move(p));
    ++have;
  }
  return pts;
}

inline std::vector<std::pair<std::size_t, std::size_t>> make_pairs(std::size_t n_points,
                                                                   std::size_t grid_count,
                                                                   SeededRng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n_points < 2) return pairs;
  pairs.reserve(3 * n_points);
  // Consecutive pairs catch local structure (the grid is sorted in 1-D);
  // antipodal pairs within the grid span the region exactly (the sorted grid
  // pairs its endpoints); whole-list antipodal and random pairs cover the
  // rest.
  for (std::size_t i = 0; i + 1 < n_points; ++i) pairs.emplace_back(i, i + 1);
  for (std::size_t i = 0; i < grid_count / 2; ++i) pairs.emplace_back(i, grid_count - 1 - i);
  for (std::size_t i = 0; i < n_points / 2; ++i) pairs.emplace_back(i, n_points - 1 - i);
  for (std::size_t k = 0; k < n_points; ++k) {
    std::size_t a = rng.index(n_points);
    std::size_t b = rng.index(n_points);
    if (a != b) pairs.emplace_back(a, b);
  }
  return pairs;
}

}  // namespace detail

/// Stratified sample of a bounded region: ceil(count/2) lattice points
/// (density doubled next to the given discontinuity loci in 1-D), the rest
/// seeded uniform draws. Deterministic in (region, count, seed, loci).
inline std::vector<Point> sample_points(const DomainSpec& region, long count, std::uint64_t seed,
                                        std::span<const double> loci = {}) {
  SeededRng rng(seed);
  return detail::sample_points_impl(region, count, rng, loci);
}

/// Points plus evaluation pairs (consecutive, antipodal, random), all
/// deterministic in (region, count, seed, loci).
inline SamplePlan sample_pairs(const DomainSpec& region, long count, std::uint64_t seed,
                               std::span<const double> loci = {}) {
  SeededRng rng(seed);
  SamplePlan plan;
  plan.points = detail::sample_points_impl(region, count, rng, loci, &plan.grid_count);
  plan.pairs = detail::make_pairs(plan.points.size(), plan.grid_count, rng);
  return plan;
}

}  // namespace fixpoint
