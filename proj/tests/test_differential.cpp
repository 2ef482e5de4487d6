#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "acceptance/reference_tables.hpp"
#include "comorbid/differential.hpp"
#include "comorbid/pipeline.hpp"

using namespace comorbid;

TEST(PooledSe, Examples) {
  EXPECT_DOUBLE_EQ(pooled_se(0.3, 0.4), 0.5);
  EXPECT_DOUBLE_EQ(pooled_se(0.7, 0.0), 0.7);
  EXPECT_DOUBLE_EQ(pooled_se(1.0, 1.0), std::sqrt(2.0));
  EXPECT_THROW(pooled_se(-1.0, 0.0), DomainError);
}

TEST(DifferentialScore, IdenticalEstimates) {
  const auto r = make_differential({2.5, 0.3}, {2.5, 0.3});
  EXPECT_EQ(r.dc, 0.0);
  EXPECT_EQ(r.ratio(), 1.0);
}

TEST(DifferentialScore, ReferenceRows) {
  const auto abuse = make_differential({std::log2(30.5), 0.5}, {std::log2(5.7), 0.1});
  EXPECT_NEAR(abuse.ratio(), 5.35, 0.005);
  EXPECT_NEAR(abuse.ratio() / 5.38, 1.0, 0.02);
  const auto anticonvulsant = make_differential({std::log2(16.8), 0.5}, {std::log2(4.7), 0.1});
  EXPECT_NEAR(anticonvulsant.ratio(), 3.57, 0.005);
  EXPECT_NEAR(anticonvulsant.ratio() / 3.61, 1.0, 0.02);
}

TEST(DifferentialScore, ReferenceIntervalMidpoint) {
  for (const auto& row : reference::kDifferential) {
    if (std::string(row.term) != "Neoplasm of stomach") continue;
    EXPECT_NEAR(row.ratio.lower * row.ratio.upper / (row.ratio.point * row.ratio.point), 1.0, 0.005);
    EXPECT_GT(row.ratio.lower, 1.0);
  }
}

TEST(DifferentialScore, AntisymmetryAndBiasInvariance) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> lor(-3, 8), se(0.01, 2), mu(1, 20);
  for (int i = 0; i < 10000; ++i) {
    const AssociationEstimate s{lor(rng), se(rng)}, b{lor(rng), se(rng)};
    const auto fwd = make_differential(s, b);
    const auto rev = make_differential(b, s);
    ASSERT_EQ(fwd.dc, -rev.dc);
    ASSERT_EQ(fwd.sigma, rev.sigma);
    ASSERT_DOUBLE_EQ(fwd.sigma * fwd.sigma, s.se * s.se + b.se * b.se);
    const double shift = std::log2(mu(rng));
    ASSERT_NEAR(make_differential({s.lor - shift, s.se}, {b.lor - shift, b.se}).dc, fwd.dc, 1e-12);
  }
}

TEST(DifferentialConfidence, NullScoreNotConfident) {
  const std::vector<AssociationEstimate> a{{3.0, 0.2}, {1.0, 0.5}}, b{{3.0, 0.1}, {1.0, 0.5}};
  const auto r = differential_confidence(a, b, NullGrid::symmetric(12), 0.05);
  for (const auto& x : r) EXPECT_FALSE(x.confident);
  EXPECT_THROW(differential_confidence(a, std::vector<AssociationEstimate>{{1, 1}}, NullGrid{}, 0.05),
               NotComparableError);
}

TEST(DifferentialConfidence, ConfidentIffLowerAboveOne) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lor(-2, 6), se(0.05, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<AssociationEstimate> a(50), b(50);
    for (std::size_t i = 0; i < 50; ++i) a[i] = {lor(rng), se(rng)}, b[i] = {lor(rng), se(rng)};
    const auto r = differential_confidence(a, b, NullGrid::symmetric(12), 0.05);
    for (const auto& x : r) {
      ASSERT_EQ(x.confident, x.fcr && x.fcr->interval.lower > 1.0);
      if (x.fcr) {
        ASSERT_NEAR(x.fcr->interval.lower * x.fcr->interval.upper / (x.ratio() * x.ratio()), 1.0, 1e-12);
      }
    }
  }
}

namespace {

SynthConfig null_population(const std::string& name, std::int64_t n, std::int64_t nc, std::uint64_t seed,
                            std::size_t terms) {
  SynthConfig cfg;
  cfg.base_name = name;
  cfg.condition_name = name + "C";
  cfg.n_base = n;
  cfg.n_condition = nc;
  cfg.seed = seed;
  cfg.stochastic = true;
  for (std::size_t i = 0; i < terms; ++i) {
    cfg.terms.push_back({"T" + std::to_string(i), "", 0.01 + 0.002 * static_cast<double>(i % 10), 2.0, 3.0});
  }
  return cfg;
}

}  // namespace

TEST(DifferentialConfidence, EqualPlantedOddsRatiosRarelyConfident) {
  AnalysisConfig cfg;
  cfg.imputation.samples = 20;
  int confident = 0, total = 0;
  double dc_sum = 0.0;
  for (std::uint64_t rep = 0; rep < 500; ++rep) {
    const auto senior = simulate_population(null_population("S", 200000, 4000, rep, 4));
    const auto bg = simulate_population(null_population("B", 500000, 5000, rep + 100000, 4));
    cfg.imputation.seed = rep;
    const auto da = compare_populations(analyze_population(senior.pair, cfg), analyze_population(bg.pair, cfg), cfg);
    for (const auto& row : da.rows) {
      confident += row.result.confident ? 1 : 0;
      dc_sum += row.result.dc;
      ++total;
    }
  }
  ASSERT_EQ(total, 2000);
  EXPECT_GE(1.0 - static_cast<double>(confident) / total, 0.95);
  EXPECT_NEAR(dc_sum / total, 0.0, 0.05);
}

TEST(DifferentialConfidence, MuDoesNotChangeDifferentialScores) {
  const auto senior = simulate_population(null_population("S", 200000, 4000, 1, 30));
  const auto bg = simulate_population(null_population("B", 500000, 5000, 2, 30));
  AnalysisConfig three, seven;
  seven.mu = 7.0;
  const auto a = compare_populations(analyze_population(senior.pair, three), analyze_population(bg.pair, three), three);
  const auto b = compare_populations(analyze_population(senior.pair, seven), analyze_population(bg.pair, seven), seven);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].result.dc, b.rows[i].result.dc);
    EXPECT_EQ(a.rows[i].result.sigma, b.rows[i].result.sigma);
    EXPECT_EQ(a.rows[i].result.confident, b.rows[i].result.confident);
  }
}
