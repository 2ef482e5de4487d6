#pragma once

// Benjamini-Hochberg selection repeated over a logarithmic grid of null
// odds-ratio levels Q. For each term, Q(t) is the largest grid level at which
// it is still selected and R(t) the size of the selection there; the
// FCR-adjusted interval is [Q(t), OR^2 / Q(t)], i.e. the symmetric log-scale
// interval at confidence 1 - alpha R(t) / M, quantized to the grid.
//
// Two implementations of the scan are provided. scan_null_grid derives the
// BH count at any level from per-rank boundaries and binary-searches each
// term; scan_null_grid_reference runs BH literally at every grid level. They
// agree to within one grid step (floating-point ties at a boundary).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "comorbid/association.hpp"
#include "comorbid/errors.hpp"
#include "comorbid/normal.hpp"
#include "comorbid/parallel.hpp"

namespace comorbid {

// Grid of null levels on the log2 scale: lo, lo + step, ..., hi.
struct NullGrid {
  double lo = -2.0;  // log2(0.25)
  double hi = 12.0;  // log2(4096)
  double step = 0.01;

  void validate() const {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) throw ConfigError("null grid needs lo < hi");
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("null grid step must be positive");
  }

  std::size_t size() const {
    const double spans = (hi - lo) / step;
    const double nearest = std::round(spans);
    const double whole = std::abs(spans - nearest) < 1e-6 ? nearest : std::floor(spans);
    return static_cast<std::size_t>(whole) + 1;
  }

  double level(std::size_t k) const { return lo + static_cast<double>(k) * step; }

  // Symmetric grid around ratio 1, used for differential scores.
  static NullGrid symmetric(double half_range, double step = 0.01) { return {-half_range, half_range, step}; }
};

inline void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

// Two-sided normal p-value of "OR = q" for an estimate on the log2 scale.
inline double p_value_at_null(const AssociationEstimate& est, double q) {
  if (!(est.se > 0.0)) throw DegenerateError("p-value needs a positive standard error");
  if (!(q > 0.0)) throw DomainError("null odds ratio must be positive");
  return std::erfc(std::abs(est.lor - std::log2(q)) / est.se / std::numbers::sqrt2);
}

// Exceedance-only p-value at a null level given on the log2 scale: estimates
// at or below the level cannot be significant.
inline double directional_p_value(const AssociationEstimate& est, double log2_q) {
  if (!(est.se > 0.0)) throw DegenerateError("p-value needs a positive standard error");
  if (est.lor <= log2_q) return 1.0;
  return std::erfc((est.lor - log2_q) / est.se / std::numbers::sqrt2);
}

// Step-up BH: number of rejections k = max{k : p_(k) <= alpha k / M}.
inline std::size_t bh_count(std::span<const double> pvalues, double alpha) {
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  for (std::size_t k = sorted.size(); k > 0; --k) {
    if (sorted[k - 1] <= alpha * static_cast<double>(k) / m) return k;
  }
  return 0;
}

// Indices (ascending) of the BH-selected hypotheses.
inline std::vector<std::size_t> bh_select(std::span<const double> pvalues, double alpha) {
  std::vector<std::size_t> selected;
  const std::size_t k = bh_count(pvalues, alpha);
  if (k == 0) return selected;
  const double cutoff = alpha * static_cast<double>(k) / static_cast<double>(pvalues.size());
  for (std::size_t i = 0; i < pvalues.size(); ++i) {
    if (pvalues[i] <= cutoff) selected.push_back(i);
  }
  return selected;
}

struct ScanEntry {
  std::optional<std::size_t> grid_index;  // index of Q(t); empty if never selected
  std::size_t r = 0;                      // R(t)

  bool selected() const { return grid_index.has_value(); }
};

namespace detail {

inline void require_scannable(std::span<const AssociationEstimate> estimates, const NullGrid& grid, double alpha) {
  grid.validate();
  validate_alpha(alpha);
  for (const auto& e : estimates) {
    if (!(e.se > 0.0) || !std::isfinite(e.lor)) throw DegenerateError("scan needs finite estimates with se > 0");
  }
}

}  // namespace detail

// Literal scan: BH at every grid level.
inline std::vector<ScanEntry> scan_null_grid_reference(std::span<const AssociationEstimate> estimates,
                                                       const NullGrid& grid, double alpha) {
  detail::require_scannable(estimates, grid, alpha);
  std::vector<ScanEntry> out(estimates.size());
  std::vector<double> p(estimates.size());
  const std::size_t levels = grid.size();
  for (std::size_t j = 0; j < levels; ++j) {
    const double g = grid.level(j);
    for (std::size_t t = 0; t < estimates.size(); ++t) p[t] = directional_p_value(estimates[t], g);
    const auto selected = bh_select(p, alpha);
    for (std::size_t t : selected) out[t] = {j, selected.size()};
  }
  return out;
}

// Boundary scan. With z_k the two-sided critical value at alpha k / M, term t
// passes the rank-k BH threshold at level g iff g <= b_t(k) = lor_t - se_t z_k.
// The BH count at g is then the largest k whose k-th largest b(k) is >= g.
inline std::vector<ScanEntry> scan_null_grid(std::span<const AssociationEstimate> estimates, const NullGrid& grid,
                                             double alpha) {
  detail::require_scannable(estimates, grid, alpha);
  const std::size_t m = estimates.size();
  std::vector<ScanEntry> out(m);
  if (m == 0) return out;

  std::vector<double> z(m + 1, 0.0);
  for (std::size_t k = 1; k <= m; ++k) {
    z[k] = two_sided_critical(alpha * static_cast<double>(k) / static_cast<double>(m));
  }

  // kth_boundary[k] = k-th largest of b_t(k); suffix maxima make the lookup monotone.
  std::vector<double> kth_boundary(m + 1, -INFINITY);
  parallel_for(m, [&](std::size_t i) {
    const std::size_t k = i + 1;
    std::vector<double> b(m);
    for (std::size_t t = 0; t < m; ++t) b[t] = estimates[t].lor - estimates[t].se * z[k];
    std::nth_element(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(k - 1), b.end(), std::greater<>());
    kth_boundary[k] = b[k - 1];
  });
  std::vector<double> suffix_max(m + 2, -INFINITY);
  for (std::size_t k = m; k >= 1; --k) suffix_max[k] = std::max(kth_boundary[k], suffix_max[k + 1]);

  // Largest k with suffix_max[k] >= g; suffix_max is nonincreasing in k.
  const auto bh_count_at = [&](double g) -> std::size_t {
    std::size_t lo = 0, hi = m;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (suffix_max[mid] >= g) lo = mid; else hi = mid - 1;
    }
    return lo;
  };

  const std::size_t levels = grid.size();
  parallel_for(m, [&](std::size_t t) {
    const AssociationEstimate& e = estimates[t];
    const auto selected_at = [&](std::size_t j) {
      const double g = grid.level(j);
      if (!(e.lor > g)) return false;
      const std::size_t k = bh_count_at(g);
      return k > 0 && g <= e.lor - e.se * z[k];
    };
    if (!selected_at(0)) return;
    // Selection is monotone in the level: true up to Q(t), false beyond.
    std::size_t lo = 0, hi = levels - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (selected_at(mid)) lo = mid; else hi = mid - 1;
    }
    out[t] = {lo, bh_count_at(grid.level(lo))};
  });
  return out;
}

struct FcrResult {
  double q_max = 0.0;   // Q(t) on the OR scale
  std::size_t r_at_q = 0;
  std::size_t m_total = 0;
  RatioInterval interval;  // [Q(t), OR^2 / Q(t)]

  // Nominal coverage of the adjusted interval, 1 - alpha R(t) / M.
  double confidence(double alpha) const {
    return 1.0 - alpha * static_cast<double>(r_at_q) / static_cast<double>(m_total);
  }
};

inline FcrResult fcr_interval(const AssociationEstimate& est, const ScanEntry& scan, const NullGrid& grid,
                              std::size_t m_total) {
  if (!scan.selected()) throw NotSelectedError("term is not BH-selected at any null level");
  const double log_q = grid.level(*scan.grid_index);
  FcrResult out;
  out.q_max = std::exp2(log_q);
  out.r_at_q = scan.r;
  out.m_total = m_total;
  out.interval = {out.q_max, std::exp2(2.0 * est.lor - log_q)};
  return out;
}

// Same construction from an explicit Q(t) on the OR scale.
inline FcrResult fcr_interval(const AssociationEstimate& est, double q_max, std::size_t r_at_q,
                              std::size_t m_total) {
  if (!(q_max > 0.0)) throw NotSelectedError("term has no significant null level");
  FcrResult out;
  out.q_max = q_max;
  out.r_at_q = r_at_q;
  out.m_total = m_total;
  out.interval = {q_max, std::exp2(2.0 * est.lor - std::log2(q_max))};
  return out;
}

}  // namespace comorbid
