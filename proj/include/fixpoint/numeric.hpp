#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include "fixpoint/errors.hpp"

namespace fixpoint {

inline bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

/// Renders a double with 17 significant digits, enough for exact
/// string -> double round-trips.
inline std::string format_g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf);
}

/// A real number carried as (sign, ln|value|) so that magnitudes far beyond
/// double overflow stay representable.
struct SignedLog {
  int sign = 0;  // -1, 0, +1
  double log_abs = -std::numeric_limits<double>::infinity();

  static SignedLog from_value(double v) {
    if (v == 0.0) return {};
    if (!std::isfinite(v)) throw NumericRangeError("SignedLog: non-finite input");
    return {v > 0 ? 1 : -1, std::log(std::abs(v))};
  }

  double log10_abs() const { return log_abs / std::numbers::ln10; }

  /// Converts back to a plain double; throws instead of returning Inf.
  double to_double() const {
    if (sign == 0) return 0.0;
    double mag = std::exp(log_abs);
    if (!std::isfinite(mag)) {
      throw NumericRangeError("SignedLog: magnitude exceeds double range");
    }
    return sign > 0 ? mag : -mag;
  }
};

}  // namespace fixpoint
