#pragma once

// Differential co-morbidity between two independent populations:
// DC(t) = C(t|first) - C(t|second), with pooled standard error, scanned over
// null ratio levels with the same BH/FCR machinery as single populations.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "comorbid/association.hpp"
#include "comorbid/errors.hpp"
#include "comorbid/multiplicity.hpp"

namespace comorbid {

// Any common bias adjustment cancels in the difference.
inline double differential_score(const AssociationEstimate& first, const AssociationEstimate& second) {
  return first.lor - second.lor;
}

inline double pooled_se(double se_first, double se_second) {
  if (se_first < 0.0 || se_second < 0.0) throw DomainError("standard errors must be non-negative");
  return std::sqrt(se_first * se_first + se_second * se_second);
}

struct DifferentialResult {
  double dc = 0.0;     // log2 ratio of odds ratios
  double sigma = 0.0;  // pooled standard error
  std::optional<FcrResult> fcr;
  bool confident = false;  // adjusted lower bound above ratio 1

  double ratio() const { return std::exp2(dc); }
  AssociationEstimate estimate() const { return {dc, sigma}; }
};

inline DifferentialResult make_differential(const AssociationEstimate& first, const AssociationEstimate& second) {
  DifferentialResult out;
  out.dc = differential_score(first, second);
  out.sigma = pooled_se(first.se, second.se);
  return out;
}

// Scans "DC = Q" over `grid` for terms valid in both populations (paired by
// position). M is the number of pairs.
inline std::vector<DifferentialResult> differential_confidence(std::span<const AssociationEstimate> first,
                                                               std::span<const AssociationEstimate> second,
                                                               const NullGrid& grid, double alpha) {
  if (first.size() != second.size()) throw NotComparableError("populations have different term counts");
  std::vector<DifferentialResult> out;
  std::vector<AssociationEstimate> diffs;
  out.reserve(first.size());
  diffs.reserve(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    out.push_back(make_differential(first[i], second[i]));
    diffs.push_back(out.back().estimate());
  }
  const auto scan = scan_null_grid(diffs, grid, alpha);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!scan[i].selected()) continue;
    out[i].fcr = fcr_interval(diffs[i], scan[i], grid, out.size());
    out[i].confident = out[i].fcr->interval.lower > 1.0;
  }
  return out;
}

}  // namespace comorbid
