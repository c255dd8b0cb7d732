#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fixpoint/errors.hpp"
#include "fixpoint/mappings.hpp"
#include "fixpoint/spaces.hpp"

namespace fixpoint {

inline constexpr double kDefaultGamma1 = 0.05;
inline constexpr double kDefaultGamma2 = 0.95;
inline constexpr double kFejerSlack = 1e-9;
inline constexpr std::size_t kMaxFamilySize = 64;

// --------------------------------------------------------------------------
// Weight schedules
// --------------------------------------------------------------------------

/// The convex weights (alpha_0n, ..., alpha_mn) of the iteration. Every
/// generated vector must lie in [gamma1, gamma2]^(m+1) and sum to 1 within
/// 1e-12; the interval check is closed because open-interval membership is
/// not decidable in floating point.
class WeightSchedule {
 public:
  struct Uniform {};
  struct Constant {
    std::vector<double> alphas;  // size m+1
  };
  /// Rule-based schedule: base weights with +/- amplitude alternating between
  /// entries 0 and 1 each step.
  struct Alternating {
    std::vector<double> base;  // size m+1
    double amplitude = 0.0;
  };
  using Rule = std::variant<Uniform, Constant, Alternating>;

  WeightSchedule(Rule rule, std::size_t family_size, double gamma1 = kDefaultGamma1,
                 double gamma2 = kDefaultGamma2)
      : rule_(std::move(rule)), m_(family_size), gamma1_(gamma1), gamma2_(gamma2) {
    if (!(gamma1_ > 0.0 && gamma1_ < gamma2_ && gamma2_ < 1.0)) {
      throw WeightError("WeightSchedule: need 0 < gamma1 < gamma2 < 1");
    }
    if (m_ < 1) throw WeightError("WeightSchedule: family size must be >= 1");
    if (const auto* c = std::get_if<Constant>(&rule_)) {
      if (c->alphas.size() != m_ + 1) {
        throw WeightError("WeightSchedule: constant rule needs m+1 weights");
      }
    }
    if (const auto* a = std::get_if<Alternating>(&rule_)) {
      if (a->base.size() != m_ + 1) {
        throw WeightError("WeightSchedule: alternating rule needs m+1 base weights");
      }
      if (!(a->amplitude >= 0.0) || !std::isfinite(a->amplitude)) {
        throw WeightError("WeightSchedule: alternating amplitude must be nonnegative");
      }
    }
  }

  static WeightSchedule uniform(std::size_t family_size, double gamma1 = kDefaultGamma1,
                                double gamma2 = kDefaultGamma2) {
    return WeightSchedule(Uniform{}, family_size, gamma1, gamma2);
  }
  static WeightSchedule constant(std::vector<double> alphas, double gamma1 = kDefaultGamma1,
                                 double gamma2 = kDefaultGamma2) {
    std::size_t m = alphas.empty() ? 0 : alphas.size() - 1;
    return WeightSchedule(Constant{std::move(alphas)}, m, gamma1, gamma2);
  }
  static WeightSchedule alternating(std::vector<double> base, double amplitude,
                                    double gamma1 = kDefaultGamma1,
                                    double gamma2 = kDefaultGamma2) {
    std::size_t m = base.empty() ? 0 : base.size() - 1;
    return WeightSchedule(Alternating{std::move(base), amplitude}, m, gamma1, gamma2);
  }

  /// Weights at step n, validated against the interval and simplex bounds.
  std::vector<double> at(long n) const {
    if (n < 1) throw InvalidInputError("WeightSchedule: step index must be >= 1");
    std::vector<double> w;
    if (std::holds_alternative<Uniform>(rule_)) {
      w.assign(m_ + 1, 1.0 / static_cast<double>(m_ + 1));
    } else if (const auto* c = std::get_if<Constant>(&rule_)) {
      w = c->alphas;
    } else {
      const auto& a = std::get<Alternating>(rule_);
      w = a.base;
      double delta = (n % 2 == 1) ? a.amplitude : -a.amplitude;
      w[0] += delta;
      w[1] -= delta;
    }
    validate_simplex(w);
    for (double wi : w) {
      if (wi < gamma1_ || wi > gamma2_) {
        throw WeightError("WeightSchedule: weight " + format_g17(wi) +
                          " outside [gamma1, gamma2] at step " + std::to_string(n));
      }
    }
    return w;
  }

  std::size_t family_size() const { return m_; }
  double gamma1() const { return gamma1_; }
  double gamma2() const { return gamma2_; }
  const Rule& rule() const { return rule_; }

 private:
  Rule rule_;
  std::size_t m_;
  double gamma1_;
  double gamma2_;
};

// --------------------------------------------------------------------------
// Iteration configuration and trace
// --------------------------------------------------------------------------

struct FamilyMember {
  MappingSpec map;
  ParameterSequences params;
};

struct IterationConfig {
  std::vector<FamilyMember> family;
  WeightSchedule weights = WeightSchedule::uniform(1);
  Point x1;
  long max_iters = 1000;
  double residual_tol = 0.0;
  std::optional<Point> reference_point;  // a known common fixed point

  std::size_t family_size() const { return family.size(); }
  const DomainSpec& domain() const { return family.front().map.domain(); }

  /// Full validation: shared domain, x1 membership, weight shape, parameter
  /// rules, declared reference point fixed for every member, and (optionally)
  /// the seeded sampling audits of each mapping.
  void validate(bool run_sampling_checks = true, std::uint64_t seed = kValidationSeed) const {
    if (family.empty() || family.size() > kMaxFamilySize) {
      throw InvalidInputError("IterationConfig: family size must lie in [1, 64]");
    }
    const DomainSpec& k = domain();
    for (const FamilyMember& member : family) {
      if (!(member.map.domain() == k)) {
        throw InvalidInputError("IterationConfig: family members must share one domain");
      }
      member.params.validate();
    }
    if (weights.family_size() != family.size()) {
      throw WeightError("IterationConfig: weight schedule sized for a different family");
    }
    if (x1.dim() != k.dim() || !domain_contains(k, x1, kDomainTolerance)) {
      throw DomainError("IterationConfig: x1 must lie in the domain");
    }
    if (max_iters < 1) throw InvalidInputError("IterationConfig: max_iters must be >= 1");
    if (!(residual_tol >= 0.0) || !std::isfinite(residual_tol)) {
      throw InvalidInputError("IterationConfig: residual_tol must be nonnegative and finite");
    }
    if (reference_point.has_value()) {
      if (reference_point->dim() != k.dim()) {
        throw InvalidInputError("IterationConfig: reference point dimension mismatch");
      }
      for (const FamilyMember& member : family) {
        if (distance(apply(member.map, *reference_point), *reference_point) >
            kFixedPointTolerance) {
          throw InvalidInputError(
              "IterationConfig: reference point is not fixed by every family member");
        }
      }
    }
    if (run_sampling_checks) {
      for (const FamilyMember& member : family) validate_mapping(member.map, seed);
    }
  }
};

enum class StopReason { ResidualTol, MaxIters };

inline std::string_view to_string(StopReason r) {
  return r == StopReason::ResidualTol ? "residual-tol" : "max-iters";
}

struct StepRecord {
  long n = 0;
  Point x;                            // x_n
  std::vector<double> residuals;      // ||x_n - T_i^n x_n||, i = 1..m
  std::optional<double> step_diff;    // ||x_{n+1} - x_n||; absent on the final record
  std::optional<double> dist_to_p;    // ||x_n - p|| when a reference point is set
  std::optional<double> theorem31_bound;  // recursive envelope on ||x_n - p||^2

  double max_residual() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, r);
    return m;
  }
};

struct IterationTrace {
  std::vector<StepRecord> steps;
  StopReason stop_reason = StopReason::MaxIters;

  long stop_step() const { return steps.empty() ? 0 : steps.back().n; }
  double final_max_residual() const { return steps.empty() ? 0.0 : steps.back().max_residual(); }
};

namespace detail {

/// Per-step coefficients of the envelope recursion e_{n+1} = (1+A_n) e_n + B_n
/// dominating ||x_n - p||^2. Derived from the linearized per-map bound
/// ||T_i^n x - p|| <= (1 + mu M*) ||x - p|| + mu phi(M) + l and 2q <= 1 + q^2.
struct EnvelopeCoeffs {
  double a = 0.0;
  double b = 0.0;
};

inline EnvelopeCoeffs theorem31_coeffs(const IterationConfig& config,
                                       std::span<const double> weights, long n) {
  EnvelopeCoeffs c;
  for (std::size_t i = 0; i < config.family.size(); ++i) {
    const ParameterSequences& params = config.family[i].params;
    const double mu = params.mu_at(n);
    const double u = mu * params.phi_of_m() + params.ell_at(n);
    const double k = 1.0 + mu * params.phi.constant_m_star();
    const double alpha = weights[i + 1];
    c.a += alpha * ((k * k - 1.0) + k * u);
    c.b += alpha * (k * u + u * u);
  }
  return c;
}

inline std::vector<Point> powers_at(const IterationConfig& config, long n, const Point& x) {
  std::vector<Point> images;
  images.reserve(config.family.size());
  for (const FamilyMember& member : config.family) {
    images.push_back(apply_power(member.map, n, x));
  }
  return images;
}

inline Point combine_step(const IterationConfig& config, std::span<const double> weights,
                          const Point& x, const std::vector<Point>& images) {
  std::vector<Point> pts;
  pts.reserve(images.size() + 1);
  pts.push_back(x);
  for (const Point& im : images) pts.push_back(im);
  Point next = convex_combine(weights, pts);
  if (!domain_contains(config.domain(), next, kDomainTolerance)) {
    throw DomainError("step: iterate left the domain");
  }
  return next;
}

}  // namespace detail

/// One step of the scheme: x -> alpha_0n x + sum_i alpha_in T_i^n x.
/// The n-th powers are evaluated at the current point; nothing is reused
/// from earlier steps.
inline Point step(const IterationConfig& config, long n, const Point& x_n) {
  if (config.family.empty()) throw InvalidInputError("step: empty family");
  if (!domain_contains(config.domain(), x_n, kDomainTolerance)) {
    throw DomainError("step: x_n outside the domain");
  }
  std::vector<double> w = config.weights.at(n);
  std::vector<Point> images = detail::powers_at(config, n, x_n);
  return detail::combine_step(config, w, x_n, images);
}

/// Runs the scheme from x1, recording residuals ||x_n - T_i^n x_n||,
/// successive differences, the distance to the reference point, and the
/// envelope bound. Stops when max_i residual_i <= residual_tol or at
/// max_iters, whichever comes first. Deterministic: identical configs give
/// bit-identical traces.
inline IterationTrace run(const IterationConfig& config) {
  config.validate();
  IterationTrace trace;
  const bool have_p = config.reference_point.has_value();
  Point x = config.x1;
  double envelope = 0.0;
  if (have_p) {
    double d1 = distance(x, *config.reference_point);
    envelope = d1 * d1;
  }
  for (long n = 1; n <= config.max_iters; ++n) {
    try {
      std::vector<double> w = config.weights.at(n);
      std::vector<Point> images = detail::powers_at(config, n, x);
      StepRecord rec;
      rec.n = n;
      rec.x = x;
      rec.residuals.reserve(images.size());
      for (const Point& im : images) rec.residuals.push_back(distance(x, im));
      if (have_p) {
        rec.dist_to_p = distance(x, *config.reference_point);
        rec.theorem31_bound = envelope;
      }
      const bool hit_tol = rec.max_residual() <= config.residual_tol;
      if (hit_tol || n == config.max_iters) {
        trace.steps.push_back(std::move(rec));
        trace.stop_reason = hit_tol ? StopReason::ResidualTol : StopReason::MaxIters;
        break;
      }
      Point next = detail::combine_step(config, w, x, images);
      rec.step_diff = distance(next, x);
      trace.steps.push_back(std::move(rec));
      if (have_p) {
        detail::EnvelopeCoeffs c = detail::theorem31_coeffs(config, w, n);
        envelope = (1.0 + c.a) * envelope + c.b;
      }
      x = std::move(next);
    } catch (const NumericRangeError& e) {
      throw NumericRangeError(std::string(e.what()) + " at step " + std::to_string(n));
    }
  }
  return trace;
}

// --------------------------------------------------------------------------
// Fejer-type audit
// --------------------------------------------------------------------------

struct FejerReport {
  long checked_steps = 0;
  long satisfied_steps = 0;
  double worst_margin = 0.0;  // min over steps of rhs - lhs
  long worst_step = 0;
  double slack = kFejerSlack;
  std::vector<long> violation_steps;

  bool passed() const { return violation_steps.empty(); }
};

/// Verifies, per recorded step, the squared-distance inequality
///   ||x_{n+1}-p||^2 <= ||x_n-p||^2 + sum_i alpha_in (2 ||x_n-p|| c_in + c_in^2) + slack,
/// with c_in = mu_in phi_i(M_i) + mu_in M_i* ||x_n-p|| + l_in.
inline FejerReport check_fejer_bound(const IterationTrace& trace, const IterationConfig& config,
                                     double slack = kFejerSlack) {
  if (!config.reference_point.has_value()) {
    throw ConfigurationError("check_fejer_bound: config has no reference point");
  }
  const Point& p = *config.reference_point;
  FejerReport report;
  report.slack = slack;
  bool first = true;
  for (std::size_t idx = 0; idx + 1 < trace.steps.size(); ++idx) {
    const StepRecord& cur = trace.steps[idx];
    const StepRecord& nxt = trace.steps[idx + 1];
    const double q = distance(cur.x, p);
    const double q_next = distance(nxt.x, p);
    std::vector<double> w = config.weights.at(cur.n);
    double rhs = q * q;
    for (std::size_t i = 0; i < config.family.size(); ++i) {
      const ParameterSequences& params = config.family[i].params;
      const double mu = params.mu_at(cur.n);
      const double c = mu * params.phi_of_m() + mu * params.phi.constant_m_star() * q +
                       params.ell_at(cur.n);
      rhs += w[i + 1] * (2.0 * q * c + c * c);
    }
    const double margin = rhs - q_next * q_next;
    ++report.checked_steps;
    if (margin >= -slack) {
      ++report.satisfied_steps;
    } else {
      report.violation_steps.push_back(cur.n);
    }
    if (first || margin < report.worst_margin) {
      report.worst_margin = margin;
      report.worst_step = cur.n;
      first = false;
    }
  }
  return report;
}

}  // namespace fixpoint
