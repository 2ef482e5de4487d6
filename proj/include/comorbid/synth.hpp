#pragma once

// Synthetic cohort exports with planted odds ratios, a multiplicative
// selection-bias inflation and optional round-to-ten censoring. Used as
// ground truth by the acceptance and FDR suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "comorbid/association.hpp"
#include "comorbid/cohort.hpp"
#include "comorbid/errors.hpp"
#include "comorbid/imputation.hpp"

namespace comorbid {

struct SynthTerm {
  std::string term_id;
  std::string description;
  double base_rate = 0.01;    // p_t: fraction of the population carrying the term
  double planted_or = 1.0;    // inherent association with the condition
  double planted_bias = 1.0;  // selection-bias inflation of the observed OR

  double observed_or() const { return planted_or * planted_bias; }
};

struct SynthConfig {
  std::string base_name = "Base";
  std::string condition_name = "Condition";
  std::int64_t n_base = 0;
  std::int64_t n_condition = 0;
  std::vector<SynthTerm> terms;
  std::int64_t rounding_width = 5;  // 0 or 5
  std::uint64_t seed = 0;
  // Draw cells binomially around the planted table instead of rounding it.
  bool stochastic = false;

  void validate() const {
    if (!(0 < n_condition && n_condition < n_base)) {
      throw ConfigError("synthetic config needs 0 < n_condition < n_base");
    }
    if (rounding_width != 0 && rounding_width != 5) throw ConfigError("rounding width must be 0 or 5");
    std::set<std::string> seen;
    for (const auto& t : terms) {
      if (t.term_id.empty()) throw ConfigError("synthetic term with empty id");
      if (!seen.insert(t.term_id).second) throw ConfigError("duplicate synthetic term '" + t.term_id + "'");
      if (!(t.base_rate > 0.0 && t.base_rate < 1.0)) {
        throw ConfigError("term '" + t.term_id + "': base rate must lie in (0, 1)");
      }
      if (!(t.planted_or > 0.0) || !std::isfinite(t.planted_or)) {
        throw ConfigError("term '" + t.term_id + "': planted OR must be positive");
      }
      if (!(t.planted_bias > 0.0) || !std::isfinite(t.planted_bias)) {
        throw ConfigError("term '" + t.term_id + "': planted bias must be positive");
      }
    }
  }
};

// Real-valued cell a solving a d / (b c) = target for fixed marginals, found by
// bisection on the strictly increasing log odds ratio over the feasible range.
inline double solve_exact_cell(std::int64_t total, std::int64_t condition, std::int64_t term, double target) {
  const double n = static_cast<double>(total);
  const double nc = static_cast<double>(condition);
  const double nt = static_cast<double>(term);
  double lo = std::max(0.0, nc + nt - n);
  double hi = std::min(nc, nt);
  if (!(lo < hi)) throw InfeasibleEffectError("", "marginals leave no interior table");
  const double log_target = std::log(target);
  const auto excess = [&](double a) {
    return std::log(a) + std::log(n - nt - nc + a) - std::log(nc - a) - std::log(nt - a) - log_target;
  };
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) < 0.0) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Integer table with marginals (N, N_c, round(p_t N)) whose odds ratio is the
// nearest achievable to `or_target`. A target too weak to register leaves
// a = 0 (a zero-cell table); one too strong to fit the marginals throws.
inline ContingencyTable solve_cells_from_or(std::int64_t total, std::int64_t condition, double base_rate,
                                            double or_target, const std::string& term_id = {}) {
  if (!(or_target > 0.0)) throw InfeasibleEffectError(term_id, "target odds ratio must be positive");
  const auto term = static_cast<std::int64_t>(std::llround(base_rate * static_cast<double>(total)));
  if (term <= 0 || term >= total) throw InfeasibleEffectError(term_id, "term frequency rounds to 0 or N");
  const double a_exact = solve_exact_cell(total, condition, term, or_target);
  const auto a = static_cast<std::int64_t>(std::llround(a_exact));
  ContingencyTable t{a, condition - a, term - a, total - condition - term + a};
  if (t.a < 0 || t.b <= 0 || t.c <= 0 || t.d <= 0) {
    throw InfeasibleEffectError(term_id, "odds ratio " + std::to_string(or_target) +
                                             " is not achievable with these marginals");
  }
  return t;
}

struct TruthRow {
  std::string term_id;
  double planted_or = 1.0;
  double planted_bias = 1.0;
  ContingencyTable cells;

  double true_or() const { return planted_or * planted_bias; }
};

struct SynthPopulation {
  PopulationPair pair;  // exact counts (width 0)
  std::vector<TruthRow> truth;
};

// Exact aggregates for every term. Deterministic mode rounds the solved table
// to integers; stochastic mode draws a ~ Bin(N_c, a*/N_c) and
// c ~ Bin(N - N_c, c*/(N - N_c)) so the population odds ratio is exactly the
// planted one.
inline SynthPopulation generate_cohort_pair(const SynthConfig& cfg) {
  cfg.validate();
  Cohort base(cfg.base_name, RoundedCount(cfg.n_base, 0));
  Cohort condition(cfg.condition_name, RoundedCount(cfg.n_condition, 0));
  SynthPopulation out;
  out.truth.reserve(cfg.terms.size());
  const std::uint64_t population_seed = cfg.seed ^ detail::fnv1a64(cfg.base_name);
  for (const auto& term : cfg.terms) {
    ContingencyTable cells;
    if (!cfg.stochastic) {
      cells = solve_cells_from_or(cfg.n_base, cfg.n_condition, term.base_rate, term.observed_or(), term.term_id);
    } else {
      const auto n_term = static_cast<std::int64_t>(std::llround(term.base_rate * static_cast<double>(cfg.n_base)));
      if (n_term <= 0 || n_term >= cfg.n_base) {
        throw InfeasibleEffectError(term.term_id, "term frequency rounds to 0 or N");
      }
      const double a_exact = solve_exact_cell(cfg.n_base, cfg.n_condition, n_term, term.observed_or());
      const std::int64_t n_rest = cfg.n_base - cfg.n_condition;
      TermEngine rng = term_stream(population_seed, term.term_id);
      std::binomial_distribution<std::int64_t> with_condition(cfg.n_condition,
                                                              a_exact / static_cast<double>(cfg.n_condition));
      std::binomial_distribution<std::int64_t> without_condition(
          n_rest, (static_cast<double>(n_term) - a_exact) / static_cast<double>(n_rest));
      const std::int64_t a = with_condition(rng);
      const std::int64_t c = without_condition(rng);
      cells = {a, cfg.n_condition - a, c, n_rest - c};
    }
    base.add_term({term.term_id, term.description, RoundedCount(cells.term_total(), 0)});
    condition.add_term({term.term_id, term.description, RoundedCount(cells.a, 0)});
    out.truth.push_back({term.term_id, term.planted_or, term.planted_bias, cells});
  }
  out.pair = make_population_pair(std::move(base), std::move(condition));
  return out;
}

// Rounds every count to the nearest ten (halves away from zero) and marks it
// with half-width 5. Width 0 returns the exports unchanged.
inline Cohort round_export(const Cohort& cohort, std::int64_t width) {
  if (width == 0) return cohort;
  if (width != 5) throw ConfigError("rounding width must be 0 or 5");
  Cohort out(cohort.name(), RoundedCount(round_to_ten(cohort.total().reported()), width));
  for (const auto& record : cohort.terms()) {
    out.add_term({record.term_id, record.description, RoundedCount(round_to_ten(record.count.reported()), width)});
  }
  return out;
}

inline PopulationPair round_export(const PopulationPair& pair, std::int64_t width) {
  return PopulationPair{round_export(pair.base, width), round_export(pair.condition, width)};
}

// Generation followed by the configured rounding.
inline SynthPopulation simulate_population(const SynthConfig& cfg) {
  SynthPopulation exact = generate_cohort_pair(cfg);
  exact.pair = round_export(exact.pair, cfg.rounding_width);
  return exact;
}

}  // namespace comorbid
