#include <gtest/gtest.h>

#include "comorbid/errors.hpp"
#include "comorbid/normal.hpp"
#include "oracles.hpp"

using namespace comorbid;

TEST(Normal, CriticalValueMatchesBisectionOracle) {
  for (double alpha : {0.5, 0.32, 0.1, 0.05, 0.01, 1e-4, 1e-8, 1e-12}) {
    EXPECT_NEAR(two_sided_critical(alpha), oracle::upper_quantile(alpha / 2.0), 1e-9) << alpha;
  }
  EXPECT_NEAR(two_sided_critical(0.05), 1.959964, 1e-6);
}

TEST(Normal, QuantileInvertsCdf) {
  for (double p : {1e-10, 0.001, 0.1, 0.5, 0.84, 0.975, 0.999999}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12 + 1e-9 * p);
  }
  EXPECT_NEAR(normal_quantile(0.84), 0.994458, 1e-6);
  EXPECT_DOUBLE_EQ(normal_quantile(0.5), 0.0);
}

TEST(Normal, RejectsOutOfRange) {
  EXPECT_THROW(normal_quantile(0.0), DomainError);
  EXPECT_THROW(normal_quantile(1.0), DomainError);
  EXPECT_THROW(two_sided_critical(0.0), DomainError);
  EXPECT_THROW(two_sided_critical(1.5), DomainError);
}

TEST(Normal, TailsAreComplementary) {
  for (double x = -6.0; x <= 6.0; x += 0.25) EXPECT_NEAR(normal_cdf(x) + normal_upper_tail(x), 1.0, 1e-15);
}
