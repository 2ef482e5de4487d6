#pragma once

// End-to-end analysis: ingest -> validity -> imputation -> null-grid scan ->
// classification, for one population or a senior/background comparison, plus
// the TSV writers behind the command-line tool.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "comorbid/association.hpp"
#include "comorbid/cohort.hpp"
#include "comorbid/differential.hpp"
#include "comorbid/errors.hpp"
#include "comorbid/export_csv.hpp"
#include "comorbid/imputation.hpp"
#include "comorbid/multiplicity.hpp"
#include "comorbid/parallel.hpp"
#include "comorbid/study_config.hpp"
#include "comorbid/synth.hpp"

namespace comorbid {

struct AnalysisConfig {
  double alpha = 0.05;
  double mu = BiasModel::kDefaultMu;
  ImputationConfig imputation;
  NullGrid grid;                    // single-population scan (log2 OR)
  double diff_half_range = 12.0;    // differential scan covers [-r, r] in log2 ratio
  LevelThresholds thresholds;
  ExportFormat format;
  double histogram_bin = 0.25;      // log2 units

  void validate() const {
    validate_alpha(alpha);
    BiasModel{mu};
    imputation.validate();
    grid.validate();
    NullGrid::symmetric(diff_half_range, grid.step).validate();
    if (!thresholds.ordered()) throw ConfigError("thresholds must satisfy 0 < minor < moderate < high");
    if (!(histogram_bin > 0.0)) throw ConfigError("histogram bin width must be positive");
  }

  NullGrid diff_grid() const { return NullGrid::symmetric(diff_half_range, grid.step); }
};

struct TermOutcome {
  std::string term_id;
  std::string description;
  ReportedCounts counts;
  Validity validity = Validity::Valid;
  std::optional<ContingencyTable> point_table;
  std::optional<PooledEstimate> pooled;  // valid terms only
  std::optional<FcrResult> fcr;          // BH-selected at some null level
  ComorbidityLevel level = ComorbidityLevel::NotSignificant;

  bool valid() const { return validity == Validity::Valid; }
  double raw_or() const { return std::exp2(pooled->lor_adj); }
};

struct PopulationAnalysis {
  std::string name;
  std::vector<TermOutcome> terms;  // sorted by term id
  std::size_t m_valid = 0;
  std::optional<SelectionBiasEstimate> bias;
  double mu = BiasModel::kDefaultMu;

  const TermOutcome* find(const std::string& term_id) const {
    auto it = std::lower_bound(terms.begin(), terms.end(), term_id,
                               [](const TermOutcome& t, const std::string& id) { return t.term_id < id; });
    return it != terms.end() && it->term_id == term_id ? &*it : nullptr;
  }
};

inline PopulationAnalysis analyze_population(const PopulationPair& pair, const AnalysisConfig& cfg,
                                             const WarningSink& sink = {}) {
  cfg.validate();
  PopulationAnalysis out;
  out.name = pair.base.name();
  out.mu = cfg.mu;
  for (auto& entry : merge_term_catalog(pair, sink)) {
    TermOutcome t;
    t.term_id = std::move(entry.term_id);
    t.description = std::move(entry.description);
    t.counts = reported_counts(pair, t.term_id);
    const PointAssessment point = assess_point_table(t.counts);
    t.validity = point.validity;
    t.point_table = point.table;
    out.terms.push_back(std::move(t));
  }

  parallel_for(out.terms.size(), [&](std::size_t i) {
    TermOutcome& t = out.terms[i];
    if (!t.valid()) return;
    try {
      t.pooled = impute_association(t.counts, cfg.imputation, t.term_id);
    } catch (const CensoringInfeasibleError&) {
      t.validity = Validity::CensoringInfeasible;
    }
  });

  std::vector<std::size_t> valid;
  std::vector<AssociationEstimate> estimates;
  for (std::size_t i = 0; i < out.terms.size(); ++i) {
    if (!out.terms[i].valid()) continue;
    valid.push_back(i);
    estimates.push_back(out.terms[i].pooled->estimate());
  }
  out.m_valid = valid.size();
  if (valid.empty()) {
    warn(sink, "population '" + out.name + "' has no valid terms");
    return out;
  }

  const auto scan = scan_null_grid(estimates, cfg.grid, cfg.alpha);
  std::vector<double> or_points;
  or_points.reserve(valid.size());
  for (std::size_t k = 0; k < valid.size(); ++k) {
    TermOutcome& t = out.terms[valid[k]];
    or_points.push_back(t.raw_or());
    if (!scan[k].selected()) continue;
    t.fcr = fcr_interval(estimates[k], scan[k], cfg.grid, valid.size());
    t.level = classify_level(t.fcr->q_max, cfg.thresholds);
  }
  out.bias = estimate_selection_bias(or_points);
  return out;
}

struct DiffRow {
  std::size_t first = 0;   // index into DifferentialAnalysis::first.terms
  std::size_t second = 0;  // index into DifferentialAnalysis::second.terms
  DifferentialResult result;
};

// Owns both population analyses; rows cover terms valid in both, by id.
struct DifferentialAnalysis {
  PopulationAnalysis first;
  PopulationAnalysis second;
  std::vector<DiffRow> rows;

  const TermOutcome& first_term(const DiffRow& r) const { return first.terms[r.first]; }
  const TermOutcome& second_term(const DiffRow& r) const { return second.terms[r.second]; }
};

// Pooled estimate of `term_id` in both populations.
inline DifferentialResult differential_for(const PopulationAnalysis& first, const PopulationAnalysis& second,
                                           const std::string& term_id) {
  const TermOutcome* a = first.find(term_id);
  const TermOutcome* b = second.find(term_id);
  if (!a || !b || !a->valid() || !b->valid()) {
    throw NotComparableError("term '" + term_id + "' is not valid in both populations");
  }
  return make_differential(a->pooled->estimate(), b->pooled->estimate());
}

inline DifferentialAnalysis compare_populations(PopulationAnalysis first, PopulationAnalysis second,
                                                const AnalysisConfig& cfg) {
  DifferentialAnalysis out{std::move(first), std::move(second), {}};
  std::vector<AssociationEstimate> est_first;
  std::vector<AssociationEstimate> est_second;
  for (std::size_t i = 0; i < out.first.terms.size(); ++i) {
    const TermOutcome& t = out.first.terms[i];
    const TermOutcome* other = out.second.find(t.term_id);
    if (!t.valid() || !other || !other->valid()) continue;
    out.rows.push_back({i, static_cast<std::size_t>(other - out.second.terms.data()), {}});
    est_first.push_back(t.pooled->estimate());
    est_second.push_back(other->pooled->estimate());
  }
  if (out.rows.empty()) return out;
  const auto results = differential_confidence(est_first, est_second, cfg.diff_grid(), cfg.alpha);
  for (std::size_t i = 0; i < results.size(); ++i) out.rows[i].result = results[i];
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt6(*v) : "NA"; }

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

// Orders by a descending key with missing keys last, then by term id.
template <typename Row, typename Key, typename Id>
void sort_rows(std::vector<Row>& rows, Key key, Id id) {
  std::sort(rows.begin(), rows.end(), [&](const Row& x, const Row& y) {
    const std::optional<double> kx = key(x), ky = key(y);
    if (kx.has_value() != ky.has_value()) return kx.has_value();
    if (kx && *kx != *ky) return *kx > *ky;
    return id(x) < id(y);
  });
}

inline void write_histogram(const std::filesystem::path& path, const std::vector<double>& values, double bin,
                            const std::vector<std::pair<std::string, double>>& markers) {
  auto out = open_output(path);
  for (const auto& [label, value] : markers) out << "#marker\t" << label << '\t' << fmt6(value) << '\n';
  out << "bin_lo\tbin_hi\tcount\n";
  if (values.empty()) return;
  std::map<long long, std::size_t> counts;
  for (double v : values) ++counts[static_cast<long long>(std::floor(v / bin))];
  for (long long k = counts.begin()->first; k <= counts.rbegin()->first; ++k) {
    auto it = counts.find(k);
    out << fmt6(static_cast<double>(k) * bin) << '\t' << fmt6(static_cast<double>(k + 1) * bin) << '\t'
        << (it == counts.end() ? 0 : it->second) << '\n';
  }
}

inline std::vector<std::pair<std::string, double>> threshold_markers(const LevelThresholds& th) {
  return {{"Minor", std::log2(th.minor)}, {"Moderate", std::log2(th.moderate)}, {"High", std::log2(th.high)}};
}

}  // namespace detail

struct AnalyzeSummary {
  std::size_t terms = 0;
  std::size_t valid = 0;
  std::size_t selected = 0;
  std::map<ComorbidityLevel, std::size_t> levels;
};

inline AnalyzeSummary summarize(const PopulationAnalysis& pa) {
  AnalyzeSummary s;
  s.terms = pa.terms.size();
  s.valid = pa.m_valid;
  for (const auto& t : pa.terms) {
    if (!t.fcr) continue;
    ++s.selected;
    ++s.levels[t.level];
  }
  return s;
}

// results.tsv, below_threshold.tsv, invalid.tsv, histogram.tsv, summary.tsv
inline void write_population_outputs(const PopulationAnalysis& pa, const AnalysisConfig& cfg,
                                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const BiasModel bias(cfg.mu);

  std::vector<const TermOutcome*> selected, below, invalid;
  std::vector<double> lors;
  for (const auto& t : pa.terms) {
    if (!t.valid()) {
      invalid.push_back(&t);
      continue;
    }
    lors.push_back(t.pooled->lor_adj);
    (t.fcr ? selected : below).push_back(&t);
  }
  const auto id = [](const TermOutcome* t) { return t->term_id; };
  detail::sort_rows(selected, [](const TermOutcome* t) -> std::optional<double> { return t->fcr->interval.lower; },
                    id);

  const auto counts = [](const TermOutcome& t) {
    return std::to_string(t.counts.total.reported()) + '\t' + std::to_string(t.counts.condition.reported()) + '\t' +
           std::to_string(t.counts.term.reported()) + '\t' + std::to_string(t.counts.term_condition.reported());
  };
  const char* count_header = "n_total\tn_condition\tn_term\tn_term_condition";

  {
    auto out = detail::open_output(dir / "results.tsv");
    out << "term_id\tdescription\traw_or\traw_lo\traw_hi\tadj_or\tadj_lo\tadj_hi\tlevel\tq_t\tr_t\t" << count_header
        << '\n';
    for (const TermOutcome* t : selected) {
      const double raw = t->raw_or();
      const RatioInterval adj = bias_adjust(t->fcr->interval, bias);
      out << t->term_id << '\t' << t->description << '\t' << detail::fmt6(raw) << '\t'
          << detail::fmt6(t->fcr->interval.lower) << '\t' << detail::fmt6(t->fcr->interval.upper) << '\t'
          << detail::fmt6(bias_adjust(raw, bias)) << '\t' << detail::fmt6(adj.lower) << '\t'
          << detail::fmt6(adj.upper) << '\t' << to_string(t->level) << '\t' << detail::fmt6(t->fcr->q_max) << '\t'
          << t->fcr->r_at_q << '\t' << counts(*t) << '\n';
    }
  }
  {
    auto out = detail::open_output(dir / "below_threshold.tsv");
    const IntervalSpec spec(cfg.alpha);
    out << "term_id\tdescription\traw_or\tplain_lo\tplain_hi\tse_adj\t" << count_header << '\n';
    for (const TermOutcome* t : below) {
      const RatioInterval plain = to_ratio(confidence_interval(t->pooled->estimate(), spec));
      out << t->term_id << '\t' << t->description << '\t' << detail::fmt6(t->raw_or()) << '\t'
          << detail::fmt6(plain.lower) << '\t' << detail::fmt6(plain.upper) << '\t'
          << detail::fmt6(t->pooled->se_adj) << '\t' << counts(*t) << '\n';
    }
  }
  {
    auto out = detail::open_output(dir / "invalid.tsv");
    out << "term_id\tdescription\treason\t" << count_header << '\n';
    for (const TermOutcome* t : invalid) {
      out << t->term_id << '\t' << t->description << '\t' << to_string(t->validity) << '\t' << counts(*t) << '\n';
    }
  }
  detail::write_histogram(dir / "histogram.tsv", lors, cfg.histogram_bin, detail::threshold_markers(cfg.thresholds));
  {
    const AnalyzeSummary s = summarize(pa);
    auto out = detail::open_output(dir / "summary.tsv");
    out << "key\tvalue\n";
    out << "population\t" << pa.name << '\n';
    out << "terms\t" << s.terms << '\n';
    out << "valid\t" << s.valid << '\n';
    out << "invalid\t" << s.terms - s.valid << '\n';
    out << "selected\t" << s.selected << '\n';
    for (auto level : {ComorbidityLevel::High, ComorbidityLevel::Moderate, ComorbidityLevel::Minor}) {
      const auto it = s.levels.find(level);
      out << "level_" << to_string(level) << '\t' << (it == s.levels.end() ? 0 : it->second) << '\n';
    }
    out << "bias_geometric_mean\t" << detail::fmt_opt(pa.bias ? std::optional(pa.bias->geometric_mean) : std::nullopt)
        << '\n';
    out << "bias_q25\t" << detail::fmt_opt(pa.bias ? std::optional(pa.bias->q25) : std::nullopt) << '\n';
    out << "bias_q75\t" << detail::fmt_opt(pa.bias ? std::optional(pa.bias->q75) : std::nullopt) << '\n';
    out << "mu\t" << detail::fmt6(cfg.mu) << '\n';
    out << "alpha\t" << detail::fmt6(cfg.alpha) << '\n';
    out << "samples\t" << cfg.imputation.samples << '\n';
    out << "seed\t" << cfg.imputation.seed << '\n';
  }
}

// diff.tsv, scatter.tsv, dc_histogram.tsv
inline void write_differential_outputs(const DifferentialAnalysis& da, const AnalysisConfig& cfg,
                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const BiasModel bias(cfg.mu);
  std::vector<const DiffRow*> rows;
  std::vector<double> dcs;
  for (const auto& r : da.rows) {
    rows.push_back(&r);
    dcs.push_back(r.result.dc);
  }
  detail::sort_rows(
      rows,
      [](const DiffRow* r) -> std::optional<double> {
        return r->result.fcr ? std::optional(r->result.fcr->interval.lower) : std::nullopt;
      },
      [&](const DiffRow* r) { return da.first_term(*r).term_id; });

  const auto adjusted = [&](const TermOutcome& t) {
    std::string s = detail::fmt6(bias_adjust(t.raw_or(), bias));
    if (t.fcr) {
      const RatioInterval adj = bias_adjust(t.fcr->interval, bias);
      s += '\t' + detail::fmt6(adj.lower) + '\t' + detail::fmt6(adj.upper);
    } else {
      s += "\tNA\tNA";
    }
    return s + '\t' + std::string(to_string(t.level));
  };

  {
    auto out = detail::open_output(dir / "diff.tsv");
    out << "term_id\tdescription\tsenior_adj_or\tsenior_adj_lo\tsenior_adj_hi\tsenior_level\t"
           "bg_adj_or\tbg_adj_lo\tbg_adj_hi\tbg_level\tdc_ratio\tdc_lo\tdc_hi\tconfident\n";
    for (const DiffRow* r : rows) {
      const auto& res = r->result;
      const TermOutcome& a = da.first_term(*r);
      out << a.term_id << '\t' << a.description << '\t' << adjusted(a) << '\t' << adjusted(da.second_term(*r))
          << '\t' << detail::fmt6(res.ratio()) << '\t'
          << (res.fcr ? detail::fmt6(res.fcr->interval.lower) : "NA") << '\t'
          << (res.fcr ? detail::fmt6(res.fcr->interval.upper) : "NA") << '\t' << (res.confident ? 1 : 0) << '\n';
    }
  }
  {
    auto out = detail::open_output(dir / "scatter.tsv");
    out << "term_id\tor_min_senior\tor_min_bg\tlevel_senior\tlevel_bg\tdifferential\n";
    std::vector<const DiffRow*> by_id = rows;
    std::sort(by_id.begin(), by_id.end(), [](const DiffRow* x, const DiffRow* y) { return x->first < y->first; });
    for (const DiffRow* r : by_id) {
      const auto or_min = [](const TermOutcome& t) {
        return t.fcr ? detail::fmt6(t.fcr->interval.lower) : std::string("NA");
      };
      const TermOutcome& a = da.first_term(*r);
      const TermOutcome& b = da.second_term(*r);
      out << a.term_id << '\t' << or_min(a) << '\t' << or_min(b) << '\t' << to_string(a.level) << '\t'
          << to_string(b.level) << '\t' << (r->result.confident ? 1 : 0) << '\n';
    }
  }
  detail::write_histogram(dir / "dc_histogram.tsv", dcs, cfg.histogram_bin, {{"Null", 0.0}});
}

// ---------------------------------------------------------------------------
// Command entry points

inline PopulationPair load_population(const std::filesystem::path& base, const std::filesystem::path& condition,
                                      const AnalysisConfig& cfg, const WarningSink& sink) {
  return make_population_pair(read_cohort_file(base, cfg.format, sink), read_cohort_file(condition, cfg.format, sink));
}

inline PopulationAnalysis run_analyze(const std::filesystem::path& base, const std::filesystem::path& condition,
                                      const AnalysisConfig& cfg, const std::filesystem::path& out_dir,
                                      const WarningSink& sink = {}) {
  cfg.validate();
  PopulationAnalysis pa = analyze_population(load_population(base, condition, cfg, sink), cfg, sink);
  write_population_outputs(pa, cfg, out_dir);
  return pa;
}

struct DiffInputs {
  std::filesystem::path senior_base, senior_condition, bg_base, bg_condition;
};

inline DifferentialAnalysis run_diff(const DiffInputs& in, const AnalysisConfig& cfg,
                                     const std::filesystem::path& out_dir, const WarningSink& sink = {}) {
  cfg.validate();
  PopulationAnalysis senior =
      analyze_population(load_population(in.senior_base, in.senior_condition, cfg, sink), cfg, sink);
  PopulationAnalysis bg = analyze_population(load_population(in.bg_base, in.bg_condition, cfg, sink), cfg, sink);
  DifferentialAnalysis da = compare_populations(std::move(senior), std::move(bg), cfg);
  if (da.rows.empty()) warn(sink, "no term is valid in both populations");
  write_differential_outputs(da, cfg, out_dir);
  return da;
}

// Writes <name>_base.csv and <name>_condition.csv per population and truth.csv.
inline void run_simulate(const StudyConfig& study, const std::filesystem::path& out_dir) {
  study.validate();
  std::filesystem::create_directories(out_dir);
  auto truth = detail::open_output(out_dir / "truth.csv");
  truth << "population,term_id,planted_or,planted_bias,a,b,c,d\n";
  for (const auto& pop : study.populations) {
    const SynthPopulation sim = simulate_population(pop.config);
    write_cohort_file(out_dir / (pop.name + "_base.csv"), sim.pair.base);
    write_cohort_file(out_dir / (pop.name + "_condition.csv"), sim.pair.condition);
    for (const auto& row : sim.truth) {
      truth << pop.name << ',' << detail::quote_field(row.term_id, ',') << ',' << detail::fmt6(row.planted_or) << ','
            << detail::fmt6(row.planted_bias) << ',' << row.cells.a << ',' << row.cells.b << ',' << row.cells.c << ','
            << row.cells.d << '\n';
    }
  }
}

}  // namespace comorbid
