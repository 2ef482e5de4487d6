#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "comorbid/errors.hpp"

namespace comorbid {

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Upper tail 1 - Phi(x), without cancellation for large x.
inline double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Phi^-1(p) for p in (0, 1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal quantile requires p in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

// Two-sided critical value z with P(|Z| > z) = alpha.
inline double two_sided_critical(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie in (0, 1)");
  }
  // Phi^-1(1 - alpha/2) written through the upper tail for accuracy at small alpha.
  return std::numbers::sqrt2 * boost::math::erfc_inv(alpha);
}

}  // namespace comorbid
