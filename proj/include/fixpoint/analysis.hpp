#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fixpoint/errors.hpp"
#include "fixpoint/mappings.hpp"
#include "fixpoint/sampling.hpp"
#include "fixpoint/sequences.hpp"
#include "fixpoint/spaces.hpp"

namespace fixpoint {

inline constexpr double kStabilizeTolerance = 1e-10;  // successive-difference threshold
inline constexpr double kDivisionGuard = 1e-14;       // ratio denominators below this are skipped

// --------------------------------------------------------------------------
// Recursive sequence envelope
// --------------------------------------------------------------------------

/// The exact recursion a_{n+1} = (1 + alpha_n) a_n + b_n together with its
/// product/sum bookkeeping and the exponential bound that certifies
/// boundedness.
struct SequenceEnvelope {
  std::vector<double> values;   // a_1 .. a_{N+1}
  std::vector<double> growth;   // prod_{k<=n} (1 + alpha_k), n = 1..N
  std::vector<double> offsets;  // sum_{k<=n} b_k,            n = 1..N
  double partial_bound = 0.0;   // exp(sum_N alpha) * (a_1 + sum_N b)
  double series_bound = 0.0;    // same with the analytic full-series sums
  double max_value = 0.0;
  bool bounded = false;  // every value <= partial_bound (within fp slack)
  std::optional<long> stabilized_at;  // first n with |a_{n+1} - a_n| < 1e-10
};

/// Evaluates the recursion for n <= n_max. The rules must come from the
/// summable kinds; a non-summable rule is a configuration error because the
/// boundedness conclusion needs finite series.
inline SequenceEnvelope sequence_bound(double a1, const SequenceRule& alpha,
                                       const SequenceRule& b, long n_max) {
  if (!(a1 >= 0.0) || !std::isfinite(a1)) {
    throw InvalidInputError("sequence_bound: a1 must be nonnegative and finite");
  }
  if (n_max < 1) throw InvalidInputError("sequence_bound: N must be >= 1");
  if (!alpha.summable()) {
    throw ConfigurationError("sequence_bound: alpha rule " + alpha.describe() +
                             " is not summable");
  }
  if (!b.summable()) {
    throw ConfigurationError("sequence_bound: b rule " + b.describe() + " is not summable");
  }
  SequenceEnvelope env;
  env.values.reserve(static_cast<std::size_t>(n_max) + 1);
  env.growth.reserve(static_cast<std::size_t>(n_max));
  env.offsets.reserve(static_cast<std::size_t>(n_max));
  double a = a1, prod = 1.0, sum_alpha = 0.0, sum_b = 0.0;
  env.values.push_back(a);
  env.max_value = a;
  for (long n = 1; n <= n_max; ++n) {
    const double an = alpha.value(n);
    const double bn = b.value(n);
    const double next = (1.0 + an) * a + bn;
    prod *= 1.0 + an;
    sum_alpha += an;
    sum_b += bn;
    env.growth.push_back(prod);
    env.offsets.push_back(sum_b);
    if (!env.stabilized_at.has_value() && std::abs(next - a) < kStabilizeTolerance) {
      env.stabilized_at = n;
    }
    a = next;
    env.values.push_back(a);
    env.max_value = std::max(env.max_value, a);
  }
  env.partial_bound = std::exp(sum_alpha) * (a1 + sum_b);
  env.series_bound = std::exp(*alpha.series_bound()) * (a1 + *b.series_bound());
  env.bounded = env.max_value <= env.partial_bound * (1.0 + 1e-12) + 1e-300;
  return env;
}

// --------------------------------------------------------------------------
// Convex-combination inequality audit
// --------------------------------------------------------------------------

/// Signed margin of
///   ||sum_i alpha_i x_i||^2 <= sum_i alpha_i ||x_i||^2 - alpha_s alpha_t g(||x_s - x_t||),
/// i.e. rhs - lhs; nonnegative means the inequality holds. With g(t) = t^2 in
/// Euclidean space the margin equals the sum of the remaining pair terms, so
/// it is nonnegative up to roundoff.
inline double check_convexity_inequality(std::span<const double> weights,
                                         std::span<const Point> points, std::size_t s,
                                         std::size_t t,
                                         const ConvexityFunction& g = ConvexityFunction::square()) {
  if (weights.size() != points.size() || points.empty()) {
    throw InvalidInputError("check_convexity_inequality: weights/points size mismatch");
  }
  if (s >= points.size() || t >= points.size()) {
    throw IndexError("check_convexity_inequality: index out of range");
  }
  if (s == t) throw IndexError("check_convexity_inequality: s and t must differ");
  validate_simplex(weights);
  const Point combined = convex_combine(weights, points);
  const double lhs_norm = norm(combined);
  double rhs = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double ni = norm(points[i]);
    rhs += weights[i] * ni * ni;
  }
  rhs -= weights[s] * weights[t] * g(distance(points[s], points[t]));
  return rhs - lhs_norm * lhs_norm;
}

inline double check_convexity_inequality(const std::vector<double>& weights,
                                         const std::vector<Point>& points, std::size_t s,
                                         std::size_t t,
                                         const ConvexityFunction& g = ConvexityFunction::square()) {
  return check_convexity_inequality(std::span<const double>(weights),
                                    std::span<const Point>(points), s, t, g);
}

// --------------------------------------------------------------------------
// Nearly-Lipschitz constant and intermediate-sense defect estimation
// --------------------------------------------------------------------------

struct EtaEstimate {
  long n = 0;
  double eta_hat = 0.0;  // max sampled ||T^n x - T^n y|| / (||x - y|| + a_n)
  double a_n = 0.0;
  std::optional<double> declared_k;
  long point_count = 0;
  long pair_count = 0;
  long skipped_pairs = 0;  // denominators under the division guard
  std::optional<std::pair<Point, Point>> witness;
};

/// Max of the normalized ratio over an explicit pair list. The reduction is a
/// max with first-index tie-breaking, so it is order-independent and never
/// decreases when pairs are appended.
inline double eta_over_pairs(const MappingSpec& t, long n, double a_n,
                             std::span<const Point> points,
                             std::span<const std::pair<std::size_t, std::size_t>> pairs,
                             long* skipped = nullptr,
                             std::optional<std::pair<Point, Point>>* witness = nullptr) {
  std::vector<Point> images(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) images[i] = apply_power(t, n, points[i]);
  double best = 0.0;
  bool found = false;
  long guard = 0;
  for (const auto& [ia, ib] : pairs) {
    const double denom = distance(points[ia], points[ib]) + a_n;
    if (denom < kDivisionGuard) {
      ++guard;
      continue;
    }
    const double ratio = distance(images[ia], images[ib]) / denom;
    if (!found || ratio > best) {
      best = ratio;
      found = true;
      if (witness != nullptr) *witness = std::make_pair(points[ia], points[ib]);
    }
  }
  if (skipped != nullptr) *skipped = guard;
  if (!found) {
    throw DivisionGuardError("eta_over_pairs: every pair hit the division guard");
  }
  return best;
}

/// Sampled lower bound of the nearly-Lipschitz constant eta(T^n) over a
/// bounded region, with the witness pair attaining it. A violation of a
/// declared k_n is certified exactly; membership is only "no violation found
/// at this resolution".
inline EtaEstimate estimate_eta(const MappingSpec& t, long n, double a_n,
                                const DomainSpec& region, long samples, std::uint64_t seed,
                                std::optional<double> declared_k = std::nullopt) {
  if (n < 1) throw InvalidInputError("estimate_eta: n must be >= 1");
  if (!(a_n >= 0.0) || !std::isfinite(a_n)) {
    throw InvalidInputError("estimate_eta: a_n must be nonnegative and finite");
  }
  if (!region.bounded()) throw ConfigurationError("estimate_eta: region must be bounded");
  std::vector<double> loci = t.discontinuity_loci();
  SamplePlan plan = sample_pairs(region, samples, seed, loci);
  EtaEstimate est;
  est.n = n;
  est.a_n = a_n;
  est.declared_k = declared_k;
  est.point_count = static_cast<long>(plan.points.size());
  est.pair_count = static_cast<long>(plan.pairs.size());
  est.eta_hat = eta_over_pairs(t, n, a_n, plan.points, plan.pairs, &est.skipped_pairs,
                               &est.witness);
  return est;
}

struct DefectEstimate {
  long n = 0;
  double a_n_hat = 0.0;    // max sampled ||T^n x - T^n y|| - ||x - y||
  double sigma_n_hat = 0.0;  // max(0, a_n_hat)
  long point_count = 0;
  long pair_count = 0;
  std::optional<std::pair<Point, Point>> witness;
};

/// Sampled intermediate-sense defect: the largest excess of image distances
/// over input distances.
inline DefectEstimate estimate_intermediate_defect(const MappingSpec& t, long n,
                                                   const DomainSpec& region, long samples,
                                                   std::uint64_t seed) {
  if (n < 1) throw InvalidInputError("estimate_intermediate_defect: n must be >= 1");
  if (!region.bounded()) {
    throw ConfigurationError("estimate_intermediate_defect: region must be bounded");
  }
  std::vector<double> loci = t.discontinuity_loci();
  SamplePlan plan = sample_pairs(region, samples, seed, loci);
  std::vector<Point> images(plan.points.size());
  for (std::size_t i = 0; i < plan.points.size(); ++i) {
    images[i] = apply_power(t, n, plan.points[i]);
  }
  DefectEstimate est;
  est.n = n;
  est.point_count = static_cast<long>(plan.points.size());
  est.pair_count = static_cast<long>(plan.pairs.size());
  bool first = true;
  for (const auto& [ia, ib] : plan.pairs) {
    const double excess =
        distance(images[ia], images[ib]) - distance(plan.points[ia], plan.points[ib]);
    if (first || excess > est.a_n_hat) {
      est.a_n_hat = excess;
      est.witness = std::make_pair(plan.points[ia], plan.points[ib]);
      first = false;
    }
  }
  est.sigma_n_hat = std::max(0.0, est.a_n_hat);
  return est;
}

// --------------------------------------------------------------------------
// Divergence demo: step differences vanish, image differences explode
// --------------------------------------------------------------------------

struct CounterexampleRow {
  long n = 0;
  double step_diff = 0.0;         // |x_{n+1} - x_n| for x_n = 1 + 1/n
  double image_diff_log10 = 0.0;  // log10 |T^{n+1} x_{n+1} - T^{n+1} x_n|, T x = 3x
};

/// For x_n = 1 + 1/n and T x = 3x: the step differences go to zero while the
/// image differences under T^{n+1} grow without bound. Image magnitudes are
/// evaluated through the scale map's log-form power (T^{n+1} is linear, so
/// |T^{n+1} u - T^{n+1} v| = |T^{n+1} (u - v)|), which stays finite long
/// after 3^n overflows doubles. Each row is cross-checked against
/// (n+1) log10(3) - log10(n) - log10(n+1) to 1e-9.
inline std::vector<CounterexampleRow> counterexample_demo(long n_max) {
  if (n_max < 1) throw InvalidInputError("counterexample_demo: N must be >= 1");
  const MappingSpec triple = MappingSpec::scale(3.0, DomainSpec::halfline(0.0));
  std::vector<CounterexampleRow> rows;
  rows.reserve(static_cast<std::size_t>(n_max));
  for (long n = 1; n <= n_max; ++n) {
    const double x_n = 1.0 + 1.0 / static_cast<double>(n);
    const double x_next = 1.0 + 1.0 / static_cast<double>(n + 1);
    const double diff = x_n - x_next;
    const SignedLog image = signed_log_power(triple, n + 1, diff);
    CounterexampleRow row{n, diff, image.log10_abs()};
    const double closed_form = static_cast<double>(n + 1) * std::log10(3.0) -
                               std::log10(static_cast<double>(n)) -
                               std::log10(static_cast<double>(n + 1));
    if (std::abs(row.image_diff_log10 - closed_form) > 1e-9) {
      throw NumericRangeError("counterexample_demo: log-form power disagrees with closed form");
    }
    rows.push_back(row);
  }
  return rows;
}

// --------------------------------------------------------------------------
// Combined certification report
// --------------------------------------------------------------------------

/// Inequality margins plus the per-n class estimates, all over the same
/// seeded sampling scheme.
struct CertifyReport {
  ViolationReport inequality;
  std::vector<EtaEstimate> eta;
  std::vector<DefectEstimate> defect;

  bool passed() const { return inequality.passed(); }
};

inline CertifyReport certify_mapping(const MappingSpec& t, const ParameterSequences& params,
                                     long n_max, long samples, std::uint64_t seed,
                                     const std::optional<DomainSpec>& sampling_region =
                                         std::nullopt) {
  params.validate();
  CertifyReport report;
  report.inequality = verify_total_asymptotic(t, params, n_max, samples, seed, sampling_region);
  const DomainSpec& region = sampling_region.has_value() ? *sampling_region : t.domain();
  for (long n = 1; n <= n_max; ++n) {
    report.eta.push_back(estimate_eta(t, n, params.a_at(n), region, samples, seed));
    report.defect.push_back(estimate_intermediate_defect(t, n, region, samples, seed));
  }
  return report;
}

}  // namespace fixpoint
