#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fixpoint/errors.hpp"
#include "fixpoint/numeric.hpp"

namespace fixpoint {

/// A nonnegative real sequence n -> value(n), n >= 1, drawn from a closed set
/// of rule kinds whose series sums are known analytically. Summability is a
/// property of the kind, certified by series_bound(), not assumed.
class SequenceRule {
 public:
  enum class Kind { Zero, InverseSquare, Geometric, Finite, Harmonic };

  static SequenceRule zero() { return SequenceRule(Kind::Zero, 0.0, 0.0, {}); }

  /// c / n^2, sum = c * pi^2 / 6.
  static SequenceRule inverse_square(double c) {
    check_scale(c);
    return SequenceRule(Kind::InverseSquare, c, 0.0, {});
  }

  /// c * q^n with 0 < q < 1, sum = c * q / (1 - q).
  static SequenceRule geometric(double c, double ratio) {
    check_scale(c);
    if (!(ratio > 0.0 && ratio < 1.0)) {
      throw InvalidInputError("SequenceRule: geometric ratio must lie in (0,1)");
    }
    return SequenceRule(Kind::Geometric, c, ratio, {});
  }

  /// Finitely supported: the given head, then identically zero.
  static SequenceRule finite(std::vector<double> head) {
    for (double v : head) {
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidInputError("SequenceRule: finite head entries must be nonnegative");
      }
    }
    return SequenceRule(Kind::Finite, 0.0, 0.0, std::move(head));
  }

  /// c / n. A null sequence but not summable; usable only where no series
  /// bound is required.
  static SequenceRule harmonic(double c) {
    check_scale(c);
    return SequenceRule(Kind::Harmonic, c, 0.0, {});
  }

  double value(long n) const {
    if (n < 1) throw InvalidInputError("SequenceRule: index must be >= 1");
    switch (kind_) {
      case Kind::Zero:
        return 0.0;
      case Kind::InverseSquare:
        return c_ / (static_cast<double>(n) * static_cast<double>(n));
      case Kind::Geometric:
        return c_ * std::pow(q_, static_cast<double>(n));
      case Kind::Finite:
        return n <= static_cast<long>(head_.size()) ? head_[static_cast<std::size_t>(n - 1)] : 0.0;
      case Kind::Harmonic:
        return c_ / static_cast<double>(n);
    }
    return 0.0;
  }

  /// Analytic bound on the full series sum; nullopt marks a non-summable kind.
  std::optional<double> series_bound() const {
    switch (kind_) {
      case Kind::Zero:
        return 0.0;
      case Kind::InverseSquare:
        return c_ * std::numbers::pi * std::numbers::pi / 6.0;
      case Kind::Geometric:
        return c_ * q_ / (1.0 - q_);
      case Kind::Finite:
        return std::accumulate(head_.begin(), head_.end(), 0.0);
      case Kind::Harmonic:
        return std::nullopt;
    }
    return std::nullopt;
  }

  bool summable() const { return series_bound().has_value(); }

  /// All built-in kinds decay monotonically to zero except finite heads,
  /// which must be sorted nonincreasing to qualify.
  bool nonincreasing_null() const {
    if (kind_ == Kind::Finite) {
      return std::is_sorted(head_.rbegin(), head_.rend());
    }
    return true;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Zero:
        return "zero";
      case Kind::InverseSquare:
        return "inverse-square(c=" + format_g17(c_) + ")";
      case Kind::Geometric:
        return "geometric(c=" + format_g17(c_) + ",q=" + format_g17(q_) + ")";
      case Kind::Finite:
        return "finite(" + std::to_string(head_.size()) + " terms)";
      case Kind::Harmonic:
        return "harmonic(c=" + format_g17(c_) + ")";
    }
    return "?";
  }

  Kind kind() const { return kind_; }
  double scale() const { return c_; }
  double ratio() const { return q_; }
  const std::vector<double>& head() const { return head_; }

  bool operator==(const SequenceRule&) const = default;

 private:
  SequenceRule(Kind kind, double c, double q, std::vector<double> head)
      : kind_(kind), c_(c), q_(q), head_(std::move(head)) {}

  static void check_scale(double c) {
    if (!std::isfinite(c) || c < 0.0) {
      throw InvalidInputError("SequenceRule: scale must be nonnegative and finite");
    }
  }

  Kind kind_;
  double c_;
  double q_;
  std::vector<double> head_;
};

}  // namespace fixpoint
