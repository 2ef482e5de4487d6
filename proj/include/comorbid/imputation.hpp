#pragma once

// Multiple imputation over the round-to-ten censoring of reported counts.
//
// Each sample redraws the four reported aggregates uniformly from their
// censoring intervals, derives the exact cells and scores them. The samples
// are pooled with Rubin's rules:
//   lor_adj = mean(LOR_i)
//   V       = mean(SE_i^2)
//   B       = sum (lor_adj - LOR_i)^2 / (m - 1)
//   se_adj  = sqrt(V + (m + 1) / m * B)

#include <cmath>
#include <cstdint>
#include <optional>
#include <concepts>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "comorbid/association.hpp"
#include "comorbid/cohort.hpp"
#include "comorbid/errors.hpp"

namespace comorbid {

struct ImputationConfig {
  int samples = 100;
  std::uint64_t seed = 0;
  // Censoring half-width. Unset means each count's declared width.
  std::optional<std::int64_t> width;
  // Redraws allowed per sample before the term is declared infeasible.
  int max_attempts = 1000;

  void validate() const {
    if (samples < 2) throw ConfigError("imputation needs at least 2 samples");
    if (width && *width < 0) throw ConfigError("censoring width must be non-negative");
    if (max_attempts < 1) throw ConfigError("max_attempts must be positive");
  }
};

struct PooledEstimate {
  double lor_adj = 0.0;
  double within = 0.0;   // V
  double between = 0.0;  // B
  double se_adj = 0.0;
  int samples = 0;

  AssociationEstimate estimate() const { return {lor_adj, se_adj}; }
};

using TermEngine = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform integer in [0, n) by rejection; independent of the standard
// library's distribution implementation so streams are portable.
template <std::uniform_random_bit_generator Engine>
std::uint64_t uniform_below(Engine& rng, std::uint64_t n) {
  static_assert(Engine::min() == 0 && Engine::max() == ~std::uint64_t{0});
  const std::uint64_t reject_from = (~std::uint64_t{0} - n + 1) % n;  // 2^64 mod n
  std::uint64_t x = rng();
  while (x < reject_from) x = rng();
  return x % n;
}

}  // namespace detail

// Random stream for one term, keyed by (seed, term id) so results do not
// depend on the order in which terms are processed.
inline TermEngine term_stream(std::uint64_t seed, std::string_view term_id) {
  return TermEngine(detail::splitmix64(seed ^ detail::splitmix64(detail::fnv1a64(term_id))));
}

// Uniform integer over {reported - width, ..., reported + width}, with the
// support clamped below at zero.
template <std::uniform_random_bit_generator Engine>
std::int64_t draw_count_sample(const RoundedCount& count, std::int64_t width, Engine& rng) {
  if (width == 0) return count.reported();
  const std::int64_t lo = std::max<std::int64_t>(0, count.reported() - width);
  const std::int64_t hi = count.reported() + width;
  return lo + static_cast<std::int64_t>(detail::uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

template <std::uniform_random_bit_generator Engine>
std::int64_t draw_count_sample(const RoundedCount& count, Engine& rng) {
  return draw_count_sample(count, count.width(), rng);
}

// Rubin pooling of per-sample estimates.
inline PooledEstimate pool_imputations(std::span<const double> lors, std::span<const double> ses) {
  if (lors.size() != ses.size()) throw DomainError("mismatched imputation sample sizes");
  if (lors.size() < 2) throw DomainError("pooling needs at least 2 samples");
  const auto m = static_cast<double>(lors.size());

  // Running means leave identical inputs bit-exact, so an uncensored run
  // reproduces the point estimate with B == 0 exactly.
  double mean_lor = 0.0;
  double mean_var = 0.0;
  for (std::size_t i = 0; i < lors.size(); ++i) {
    const auto k = static_cast<double>(i + 1);
    mean_lor += (lors[i] - mean_lor) / k;
    mean_var += (ses[i] * ses[i] - mean_var) / k;
  }
  double ss = 0.0;
  for (double lor : lors) ss += (mean_lor - lor) * (mean_lor - lor);
  const double between = ss / (m - 1.0);

  PooledEstimate out;
  out.lor_adj = mean_lor;
  out.within = mean_var;
  out.between = between;
  out.se_adj = std::sqrt(mean_var + (m + 1.0) / m * between);
  out.samples = static_cast<int>(lors.size());
  return out;
}

// Draws one feasible set of exact aggregates and scores it.
template <std::uniform_random_bit_generator Engine>
AssociationEstimate impute_one(const ReportedCounts& counts, const ImputationConfig& cfg, Engine& rng) {
  const auto width_of = [&](const RoundedCount& c) { return cfg.width.value_or(c.width()); };
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    const Marginals drawn{draw_count_sample(counts.total, width_of(counts.total), rng),
                          draw_count_sample(counts.condition, width_of(counts.condition), rng),
                          draw_count_sample(counts.term, width_of(counts.term), rng),
                          draw_count_sample(counts.term_condition, width_of(counts.term_condition), rng)};
    ContingencyTable table;
    try {
      table = build_contingency(drawn);
    } catch (const InconsistentMarginalsError&) {
      continue;
    }
    if (table.any_zero()) return estimate_association(with_continuity_correction(table));
    return estimate_association(table);
  }
  throw CensoringInfeasibleError("no feasible draw after " + std::to_string(cfg.max_attempts) + " attempts");
}

template <std::uniform_random_bit_generator Engine>
PooledEstimate impute_association(const ReportedCounts& counts, const ImputationConfig& cfg, Engine& rng) {
  cfg.validate();
  std::vector<double> lors(static_cast<std::size_t>(cfg.samples));
  std::vector<double> ses(lors.size());
  for (std::size_t i = 0; i < lors.size(); ++i) {
    const AssociationEstimate est = impute_one(counts, cfg, rng);
    lors[i] = est.lor;
    ses[i] = est.se;
  }
  return pool_imputations(lors, ses);
}

// Convenience overload using the term's own stream.
inline PooledEstimate impute_association(const ReportedCounts& counts, const ImputationConfig& cfg,
                                         std::string_view term_id) {
  TermEngine rng = term_stream(cfg.seed, term_id);
  return impute_association(counts, cfg, rng);
}

}  // namespace comorbid
