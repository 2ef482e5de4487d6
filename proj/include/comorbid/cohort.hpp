#pragma once

// Cohort data model: privacy-rounded counts, term frequency tables, and the
// 2x2 contingency table derived from the four observed aggregates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "comorbid/errors.hpp"

namespace comorbid {

// Receives human-readable warnings (description conflicts, lenient rounding).
using WarningSink = std::function<void(const std::string&)>;

inline void warn(const WarningSink& sink, const std::string& message) {
  if (sink) sink(message);
}

// Nearest multiple of ten, halves away from zero.
constexpr std::int64_t round_to_ten(std::int64_t value) {
  return value >= 0 ? ((value + 5) / 10) * 10 : -((-value + 5) / 10) * 10;
}

// A record count as reported by the export. With the default half-width of
// 5 the true count lies in [reported - 5, reported + 5], clamped at zero; a
// half-width of 0 marks an exact (unrounded) count.
class RoundedCount {
 public:
  static constexpr std::int64_t kDefaultWidth = 5;

  constexpr RoundedCount() = default;

  explicit RoundedCount(std::int64_t reported, std::int64_t width = kDefaultWidth)
      : reported_(reported), width_(width) {
    if (reported < 0) throw DomainError("count must be non-negative, got " + std::to_string(reported));
    if (width < 0) throw DomainError("censoring half-width must be non-negative");
    if (width > 0 && reported % 10 != 0) {
      throw DomainError("rounded count must be a multiple of ten, got " + std::to_string(reported));
    }
  }

  constexpr std::int64_t reported() const noexcept { return reported_; }
  constexpr std::int64_t width() const noexcept { return width_; }
  constexpr bool exact() const noexcept { return width_ == 0; }
  constexpr std::int64_t lower() const noexcept { return std::max<std::int64_t>(0, reported_ - width_); }
  constexpr std::int64_t upper() const noexcept { return reported_ + width_; }

  friend constexpr bool operator==(const RoundedCount&, const RoundedCount&) = default;

 private:
  std::int64_t reported_ = 0;
  std::int64_t width_ = kDefaultWidth;
};

struct TermRecord {
  std::string term_id;
  std::string description;
  RoundedCount count;
};

// A named population: total record count plus the per-term frequency table.
// Terms keep their insertion order so a parsed export serializes back verbatim.
class Cohort {
 public:
  Cohort() = default;
  Cohort(std::string name, RoundedCount total) : name_(std::move(name)), total_(total) {}

  const std::string& name() const noexcept { return name_; }
  RoundedCount total() const noexcept { return total_; }
  std::span<const TermRecord> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  void add_term(TermRecord record) {
    // Rounding can push a term count past the rounded total by at most one step.
    const std::int64_t slack = record.count.exact() && total_.exact() ? 0 : 10;
    if (record.count.reported() > total_.reported() + slack) {
      throw DomainError("term '" + record.term_id + "' count " + std::to_string(record.count.reported()) +
                        " exceeds cohort total " + std::to_string(total_.reported()));
    }
    auto [it, inserted] = index_.try_emplace(record.term_id, terms_.size());
    if (!inserted) throw DuplicateTermError(record.term_id);
    terms_.push_back(std::move(record));
  }

  const TermRecord* find(std::string_view term_id) const {
    auto it = index_.find(std::string(term_id));
    return it == index_.end() ? nullptr : &terms_[it->second];
  }

  // f_X(t); terms absent from the table are materialized as a reported zero.
  RoundedCount frequency(std::string_view term_id) const {
    const TermRecord* record = find(term_id);
    return record ? record->count : RoundedCount(0, total_.width());
  }

 private:
  std::string name_;
  RoundedCount total_;
  std::vector<TermRecord> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Population Z together with its subpopulation carrying the target condition.
struct PopulationPair {
  Cohort base;
  Cohort condition;
};

inline PopulationPair make_population_pair(Cohort base, Cohort condition) {
  if (condition.total().reported() > base.total().reported()) {
    throw DomainError("condition cohort '" + condition.name() + "' (" + std::to_string(condition.total().reported()) +
                      ") is larger than base cohort '" + base.name() + "' (" +
                      std::to_string(base.total().reported()) + ")");
  }
  return PopulationPair{std::move(base), std::move(condition)};
}

struct CatalogEntry {
  std::string term_id;
  std::string description;
};

// Union of both term catalogs sorted by term id. Descriptions come from the
// base cohort; disagreements are reported through `sink`.
inline std::vector<CatalogEntry> merge_term_catalog(const PopulationPair& pair, const WarningSink& sink = {}) {
  std::map<std::string, std::string> merged;
  for (const auto& record : pair.base.terms()) merged.emplace(record.term_id, record.description);
  for (const auto& record : pair.condition.terms()) {
    auto [it, inserted] = merged.emplace(record.term_id, record.description);
    if (!inserted && it->second != record.description) {
      warn(sink, "description conflict for term '" + record.term_id + "': keeping '" + it->second +
                     "' from cohort '" + pair.base.name() + "', ignoring '" + record.description + "'");
    }
  }
  std::vector<CatalogEntry> out;
  out.reserve(merged.size());
  for (auto& [id, description] : merged) out.push_back({id, std::move(description)});
  return out;
}

// The four aggregates a contingency table is derived from, for one term.
template <typename Count>
struct BasicMarginals {
  Count total{};           // N_Z
  Count condition{};       // N_Z(IPV)
  Count term{};            // N_Z(t)
  Count term_condition{};  // N_Z(t, IPV)

  friend constexpr bool operator==(const BasicMarginals&, const BasicMarginals&) = default;
};

using Marginals = BasicMarginals<std::int64_t>;
using ReportedCounts = BasicMarginals<RoundedCount>;

inline ReportedCounts reported_counts(const PopulationPair& pair, std::string_view term_id) {
  return {pair.base.total(), pair.condition.total(), pair.base.frequency(term_id),
          pair.condition.frequency(term_id)};
}

inline Marginals point_marginals(const ReportedCounts& counts) {
  return {counts.total.reported(), counts.condition.reported(), counts.term.reported(),
          counts.term_condition.reported()};
}

// 2x2 table for (term x condition) within one population:
//   a = N(t, C)   b = N(~t, C)   c = N(t, ~C)   d = N(~t, ~C)
template <typename Count>
struct BasicContingencyTable {
  Count a{};
  Count b{};
  Count c{};
  Count d{};

  constexpr Count total() const { return a + b + c + d; }
  constexpr Count condition_total() const { return a + b; }
  constexpr Count term_total() const { return a + c; }
  constexpr bool all_positive() const { return a > 0 && b > 0 && c > 0 && d > 0; }
  constexpr bool any_zero() const { return a == 0 || b == 0 || c == 0 || d == 0; }

  constexpr BasicMarginals<Count> marginals() const { return {total(), condition_total(), term_total(), a}; }

  friend constexpr bool operator==(const BasicContingencyTable&, const BasicContingencyTable&) = default;
};

using ContingencyTable = BasicContingencyTable<std::int64_t>;
using CorrectedTable = BasicContingencyTable<double>;

// Derives the exact cells from the four aggregates.
inline ContingencyTable build_contingency(const Marginals& m) {
  ContingencyTable t{m.term_condition, m.condition - m.term_condition, m.term - m.term_condition,
                     m.total + m.term_condition - m.condition - m.term};
  if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0) {
    throw InconsistentMarginalsError("marginals (N=" + std::to_string(m.total) + ", N(C)=" +
                                     std::to_string(m.condition) + ", N(t)=" + std::to_string(m.term) +
                                     ", N(t,C)=" + std::to_string(m.term_condition) + ") imply a negative cell");
  }
  return t;
}

inline ContingencyTable build_contingency(std::int64_t total, std::int64_t condition, std::int64_t term,
                                          std::int64_t term_condition) {
  return build_contingency(Marginals{total, condition, term, term_condition});
}

// Point table from the reported (unsampled) values of one term.
inline ContingencyTable build_contingency(const PopulationPair& pair, std::string_view term_id) {
  return build_contingency(point_marginals(reported_counts(pair, term_id)));
}

// Haldane-Anscombe correction: +0.5 on every cell.
template <typename Count>
CorrectedTable with_continuity_correction(const BasicContingencyTable<Count>& t) {
  return {static_cast<double>(t.a) + 0.5, static_cast<double>(t.b) + 0.5, static_cast<double>(t.c) + 0.5,
          static_cast<double>(t.d) + 0.5};
}

template <typename Count>
CorrectedTable to_real(const BasicContingencyTable<Count>& t) {
  return {static_cast<double>(t.a), static_cast<double>(t.b), static_cast<double>(t.c), static_cast<double>(t.d)};
}

// An association interval is usable only if both ends are finite and positive.
inline bool term_validity(double lower, double upper) {
  return std::isfinite(lower) && std::isfinite(upper) && lower > 0.0 && upper > 0.0;
}

enum class Validity { Valid, InconsistentMarginals, ZeroCell, CensoringInfeasible };

inline std::string_view to_string(Validity v) {
  switch (v) {
    case Validity::Valid: return "valid";
    case Validity::InconsistentMarginals: return "inconsistent_marginals";
    case Validity::ZeroCell: return "zero_cell";
    case Validity::CensoringInfeasible: return "censoring_infeasible";
  }
  return "unknown";
}

struct PointAssessment {
  Validity validity = Validity::Valid;
  std::optional<ContingencyTable> table;

  bool valid() const { return validity == Validity::Valid; }
};

// Validity is decided on the reported table, before any imputation: every
// cell must be at least one so the Wald interval is finite.
inline PointAssessment assess_point_table(const ReportedCounts& counts) {
  try {
    ContingencyTable t = build_contingency(point_marginals(counts));
    return {t.all_positive() ? Validity::Valid : Validity::ZeroCell, t};
  } catch (const InconsistentMarginalsError&) {
    return {Validity::InconsistentMarginals, std::nullopt};
  }
}

}  // namespace comorbid
