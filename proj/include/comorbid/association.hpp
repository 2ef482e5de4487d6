#pragma once

// Co-morbidity score (log2 odds ratio), its Wald standard error, plain
// confidence intervals, selection-bias adjustment and level classification.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "comorbid/cohort.hpp"
#include "comorbid/errors.hpp"
#include "comorbid/normal.hpp"

namespace comorbid {

struct AssociationEstimate {
  double lor = 0.0;  // log2 odds ratio
  double se = 0.0;   // standard error on the log2 scale

  double or_point() const { return std::exp2(lor); }
};

// Closed interval on the log2 scale.
struct LogInterval {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  bool contains(double x) const { return lower <= x && x <= upper; }
};

// Same interval mapped to the odds-ratio scale.
struct RatioInterval {
  double lower = 0.0;
  double upper = 0.0;
};

inline RatioInterval to_ratio(const LogInterval& i) { return {std::exp2(i.lower), std::exp2(i.upper)}; }

class IntervalSpec {
 public:
  explicit IntervalSpec(double alpha = 0.05) : alpha_(alpha), z_alpha_(two_sided_critical(alpha)) {}

  double alpha() const noexcept { return alpha_; }
  double z_alpha() const noexcept { return z_alpha_; }

 private:
  double alpha_;
  double z_alpha_;
};

// Odds-ratio level attributed to selection bias rather than co-morbidity.
class BiasModel {
 public:
  static constexpr double kDefaultMu = 3.0;

  explicit BiasModel(double mu = kDefaultMu) : mu_(mu) {
    if (!(mu >= 1.0) || !std::isfinite(mu)) throw ConfigError("selection bias mu must be a finite value >= 1");
  }

  double mu() const noexcept { return mu_; }

 private:
  double mu_;
};

enum class ComorbidityLevel { NotSignificant = 0, Minor = 1, Moderate = 2, High = 3 };

inline std::string_view to_string(ComorbidityLevel level) {
  switch (level) {
    case ComorbidityLevel::High: return "High";
    case ComorbidityLevel::Moderate: return "Moderate";
    case ComorbidityLevel::Minor: return "Minor";
    case ComorbidityLevel::NotSignificant: return "NotSignificant";
  }
  return "NotSignificant";
}

// Null odds-ratio levels separating Minor / Moderate / High.
struct LevelThresholds {
  double minor = 3.0;
  double moderate = 5.0;
  double high = 10.0;

  bool ordered() const { return 0.0 < minor && minor < moderate && moderate < high; }
};

template <typename Count>
void require_positive_cells(const BasicContingencyTable<Count>& t) {
  if (!(t.a > 0 && t.b > 0 && t.c > 0 && t.d > 0)) {
    throw NonFiniteError("contingency table has a zero cell");
  }
}

// C(t|Z) = log2(a d / (b c)).
template <typename Count>
double log_odds_ratio(const BasicContingencyTable<Count>& t) {
  require_positive_cells(t);
  // Summed per cell so that swapping (a,d) with (b,c) negates the result exactly.
  const double together = std::log2(static_cast<double>(t.a)) + std::log2(static_cast<double>(t.d));
  const double apart = std::log2(static_cast<double>(t.b)) + std::log2(static_cast<double>(t.c));
  return together - apart;
}

// Wald standard error of the log2 odds ratio.
template <typename Count>
double wald_standard_error(const BasicContingencyTable<Count>& t) {
  require_positive_cells(t);
  const double sum = 1.0 / static_cast<double>(t.a) + 1.0 / static_cast<double>(t.b) +
                     1.0 / static_cast<double>(t.c) + 1.0 / static_cast<double>(t.d);
  return std::sqrt(sum) / std::numbers::ln2;
}

template <typename Count>
AssociationEstimate estimate_association(const BasicContingencyTable<Count>& t) {
  return {log_odds_ratio(t), wald_standard_error(t)};
}

inline LogInterval confidence_interval(const AssociationEstimate& est, const IntervalSpec& spec) {
  const double half = spec.z_alpha() * est.se;
  return {est.lor - half, est.lor + half};
}

// Removes the bias level on the ratio scale (subtracting log2 mu on the log scale).
inline double bias_adjust(double or_value, const BiasModel& model) {
  if (!(or_value > 0.0)) throw DomainError("odds ratio must be positive");
  return or_value / model.mu();
}

inline RatioInterval bias_adjust(const RatioInterval& interval, const BiasModel& model) {
  return {bias_adjust(interval.lower, model), bias_adjust(interval.upper, model)};
}

// Level from the multiplicity-adjusted lower bound on the raw OR scale.
// Boundaries are strict: a lower bound of exactly 10 is Moderate.
inline ComorbidityLevel classify_level(double or_min_raw, const LevelThresholds& thresholds = {}) {
  if (or_min_raw > thresholds.high) return ComorbidityLevel::High;
  if (or_min_raw > thresholds.moderate) return ComorbidityLevel::Moderate;
  if (or_min_raw > thresholds.minor) return ComorbidityLevel::Minor;
  return ComorbidityLevel::NotSignificant;
}

struct SelectionBiasEstimate {
  double geometric_mean = 1.0;  // of the per-term OR point estimates
  double q25 = 1.0;             // 25th percentile of the OR point estimates
  double q75 = 1.0;             // 75th percentile

  BiasModel model() const { return BiasModel(std::max(1.0, geometric_mean)); }
};

namespace detail {

// Linear-interpolation percentile of sorted data (Hyndman-Fan type 7).
inline double percentile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

// Average co-morbidity over all valid terms, reported on the OR scale with a
// quartile spread. The caller decides whether to adopt it as mu.
inline SelectionBiasEstimate estimate_selection_bias(std::span<const double> or_points) {
  if (or_points.empty()) throw DomainError("selection bias estimate needs at least one valid term");
  double log_sum = 0.0;
  std::vector<double> sorted(or_points.begin(), or_points.end());
  for (double v : sorted) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("odds ratios must be finite and positive");
    log_sum += std::log2(v);
  }
  std::sort(sorted.begin(), sorted.end());
  return {std::exp2(log_sum / static_cast<double>(sorted.size())), detail::percentile_sorted(sorted, 0.25),
          detail::percentile_sorted(sorted, 0.75)};
}

}  // namespace comorbid
