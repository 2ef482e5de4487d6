#include <set>

#include <gtest/gtest.h>

#include "comorbid/pipeline.hpp"
#include "test_support.hpp"

using namespace comorbid;
using testing_support::ScratchDir;

namespace {

SynthConfig fixture(std::uint64_t seed = 3) {
  SynthConfig cfg;
  cfg.base_name = "Z";
  cfg.condition_name = "ZC";
  cfg.n_base = 300000;
  cfg.n_condition = 3000;
  cfg.seed = seed;
  for (int i = 0; i < 60; ++i) cfg.terms.push_back({"N" + std::to_string(100 + i), "null", 0.004 + 0.0003 * i, 1.0, 3.0});
  cfg.terms.push_back({"HIGH", "planted", 0.01, 12.0, 3.0});
  cfg.terms.push_back({"MOD", "planted", 0.01, 3.0, 3.0});
  cfg.terms.push_back({"RARE", "absent in condition", 0.00003, 1.0, 1.0});
  return cfg;
}

void write_pair(const PopulationPair& pair, const std::filesystem::path& base, const std::filesystem::path& cond) {
  write_cohort_file(base, pair.base);
  write_cohort_file(cond, pair.condition);
}

}  // namespace

TEST(Analyze, PlantedHighTermRanksFirst) {
  ScratchDir dir("analyze");
  write_pair(simulate_population(fixture()).pair, dir / "z.csv", dir / "zc.csv");
  const AnalysisConfig cfg;
  const auto pa = run_analyze(dir / "z.csv", dir / "zc.csv", cfg, dir / "out");
  const auto rows = testing_support::read_tsv(dir / "out" / "results.tsv");
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], "term_id");
  EXPECT_EQ(rows[1][0], "HIGH");
  EXPECT_EQ(rows[1][8], "High");
  EXPECT_EQ(pa.find("HIGH")->level, ComorbidityLevel::High);
  EXPECT_EQ(pa.find("RARE")->validity, Validity::ZeroCell);
}

TEST(Analyze, OrderingAndPartition) {
  ScratchDir dir("partition");
  write_pair(simulate_population(fixture(9)).pair, dir / "z.csv", dir / "zc.csv");
  const AnalysisConfig cfg;
  const auto pa = run_analyze(dir / "z.csv", dir / "zc.csv", cfg, dir / "out");

  const auto results = testing_support::read_tsv(dir / "out" / "results.tsv");
  const auto below = testing_support::read_tsv(dir / "out" / "below_threshold.tsv");
  const auto invalid = testing_support::read_tsv(dir / "out" / "invalid.tsv");
  for (std::size_t i = 2; i < results.size(); ++i) {
    EXPECT_GE(std::stod(results[i - 1][3]), std::stod(results[i][3]));
    EXPECT_GE(std::stod(results[i - 1][9]), std::stod(results[i][9]));
    EXPECT_EQ(results[i][3], results[i][9]);
  }
  std::multiset<std::string> seen;
  for (std::size_t i = 1; i < results.size(); ++i) seen.insert(results[i][0]);
  for (std::size_t i = 1; i < below.size(); ++i) seen.insert(below[i][0]);
  std::set<std::string> invalid_ids;
  for (std::size_t i = 1; i < invalid.size(); ++i) {
    invalid_ids.insert(invalid[i][0]);
    EXPECT_FALSE(invalid[i][2].empty());
  }
  for (const auto& t : pa.terms) {
    if (t.valid()) {
      EXPECT_EQ(seen.count(t.term_id), 1u) << t.term_id;
      EXPECT_EQ(invalid_ids.count(t.term_id), 0u);
    } else {
      EXPECT_EQ(seen.count(t.term_id), 0u);
      EXPECT_EQ(invalid_ids.count(t.term_id), 1u);
    }
  }
  EXPECT_EQ(seen.size(), pa.m_valid);
  const auto hist = testing_support::read_tsv(dir / "out" / "histogram.tsv");
  std::size_t binned = 0;
  for (std::size_t i = 1; i < hist.size(); ++i) binned += std::stoul(hist[i][2]);
  EXPECT_EQ(binned, pa.m_valid);
}

TEST(Analyze, EmptyConditionOverlap) {
  ScratchDir dir("empty");
  testing_support::write_text(dir / "z.csv", "#cohort=Z,total=100000\nA,a,500\nB,b,700\n");
  testing_support::write_text(dir / "zc.csv", "#cohort=ZC,total=1000\n");
  std::vector<std::string> warnings;
  const auto pa = run_analyze(dir / "z.csv", dir / "zc.csv", AnalysisConfig{}, dir / "out",
                              [&](const std::string& w) { warnings.push_back(w); });
  EXPECT_EQ(pa.m_valid, 0u);
  EXPECT_FALSE(warnings.empty());
  EXPECT_EQ(testing_support::read_tsv(dir / "out" / "results.tsv").size(), 1u);
  EXPECT_EQ(testing_support::read_tsv(dir / "out" / "invalid.tsv").size(), 3u);
}

TEST(Analyze, ByteIdenticalReruns) {
  ScratchDir dir("determinism");
  write_pair(simulate_population(fixture()).pair, dir / "z.csv", dir / "zc.csv");
  AnalysisConfig cfg;
  cfg.imputation.seed = 11;
  run_analyze(dir / "z.csv", dir / "zc.csv", cfg, dir / "a");
  run_analyze(dir / "z.csv", dir / "zc.csv", cfg, dir / "b");
  for (const char* f : {"results.tsv", "below_threshold.tsv", "invalid.tsv", "histogram.tsv", "summary.tsv"}) {
    EXPECT_EQ(testing_support::slurp(dir / "a" / f), testing_support::slurp(dir / "b" / f)) << f;
  }
}

TEST(Analyze, ThreadCountDoesNotChangeResults) {
  const auto pair = simulate_population(fixture()).pair;
  AnalysisConfig cfg;
  const auto a = analyze_population(pair, cfg);
  std::vector<PooledEstimate> sequential;
  for (const auto& t : a.terms) {
    if (t.valid()) sequential.push_back(impute_association(t.counts, cfg.imputation, t.term_id));
  }
  std::size_t k = 0;
  for (const auto& t : a.terms) {
    if (!t.valid()) continue;
    EXPECT_EQ(t.pooled->lor_adj, sequential[k].lor_adj);
    EXPECT_EQ(t.pooled->se_adj, sequential[k].se_adj);
    ++k;
  }
}

TEST(Analyze, ConfigValidation) {
  AnalysisConfig cfg;
  cfg.thresholds = {5, 3, 10};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.alpha = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.mu = 0.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Diff, IdenticalPopulations) {
  ScratchDir dir("identical");
  write_pair(simulate_population(fixture()).pair, dir / "z.csv", dir / "zc.csv");
  const auto da = run_diff({dir / "z.csv", dir / "zc.csv", dir / "z.csv", dir / "zc.csv"}, AnalysisConfig{}, dir / "out");
  ASSERT_FALSE(da.rows.empty());
  for (const auto& r : da.rows) {
    EXPECT_EQ(r.result.dc, 0.0);
    EXPECT_FALSE(r.result.confident);
  }
  const auto diff = testing_support::read_tsv(dir / "out" / "diff.tsv");
  for (std::size_t i = 1; i < diff.size(); ++i) {
    EXPECT_EQ(diff[i][10], "1");
    EXPECT_EQ(diff[i][13], "0");
  }
}

TEST(Diff, PlantedDifferentialIsConfidentAcrossSeeds) {
  const auto make = [](const std::string& name, std::int64_t n, double planted, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.base_name = name;
    cfg.condition_name = name + "IPV";
    cfg.n_base = n;
    cfg.n_condition = n / 100;
    cfg.seed = seed;
    cfg.stochastic = true;
    for (int i = 0; i < 30; ++i) cfg.terms.push_back({"N" + std::to_string(i), "", 0.01, 1.0, 3.0});
    cfg.terms.push_back({"DIFF", "", 0.02, planted, 3.0});
    return simulate_population(cfg).pair;
  };
  int confident = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    AnalysisConfig cfg;
    cfg.imputation.seed = seed;
    const auto da = compare_populations(analyze_population(make("Senior", 400000, 10.0, seed), cfg),
                                        analyze_population(make("BG", 1000000, 2.0, seed + 1000), cfg), cfg);
    for (const auto& r : da.rows) {
      if (da.first_term(r).term_id == "DIFF") confident += r.result.confident ? 1 : 0;
    }
  }
  EXPECT_GE(confident, 95);
}

TEST(Diff, ByteIdenticalReruns) {
  ScratchDir dir("diffdet");
  run_simulate(default_study_config(), dir.path());
  const DiffInputs in{dir / "senior_base.csv", dir / "senior_condition.csv", dir / "bg_base.csv",
                      dir / "bg_condition.csv"};
  const auto da = run_diff(in, AnalysisConfig{}, dir / "a");
  run_diff(in, AnalysisConfig{}, dir / "b");
  for (const char* f : {"diff.tsv", "scatter.tsv", "dc_histogram.tsv"}) {
    EXPECT_EQ(testing_support::slurp(dir / "a" / f), testing_support::slurp(dir / "b" / f)) << f;
  }
  bool planted_confident = false;
  for (const auto& r : da.rows) {
    if (da.first_term(r).term_id == "T103") planted_confident = r.result.confident;
  }
  EXPECT_TRUE(planted_confident);
}

TEST(Simulate, WritesExportsAndLedger) {
  ScratchDir dir("simulate");
  run_simulate(default_study_config(), dir.path());
  for (const char* f : {"senior_base.csv", "senior_condition.csv", "bg_base.csv", "bg_condition.csv", "truth.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const Cohort c = read_cohort_file(dir / "senior_condition.csv");
  EXPECT_EQ(c.name(), "SeniorIPV");
  EXPECT_EQ(c.total().reported(), 4000);
}
