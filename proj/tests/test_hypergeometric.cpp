#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numeric>

#include "crowdagg/error.hpp"
#include "crowdagg/evaluation.hpp"
#include "crowdagg/hypergeometric.hpp"
#include "crowdagg/rng.hpp"

namespace crowdagg {
namespace {

// Counts drawn subsets by enumerating every bitmask of the population.
double brute_tail(unsigned population, unsigned marked, unsigned drawn, unsigned threshold) {
  const std::uint32_t marked_mask = (1u << marked) - 1u;
  std::uint64_t hits = 0, total = 0;
  for (std::uint32_t s = 0; s < (1u << population); ++s) {
    if (static_cast<unsigned>(std::popcount(s)) != drawn) continue;
    ++total;
    if (static_cast<unsigned>(std::popcount(s & marked_mask)) >= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

TEST(HypergeometricTail, MatchesEnumeration) {
  for (unsigned n = 1; n <= 12; ++n) {
    for (unsigned k = 0; k <= n; ++k) {
      for (unsigned d = 0; d <= n; ++d) {
        for (unsigned t = 0; t <= std::min(k, d) + 1; ++t) {
          EXPECT_DOUBLE_EQ(hypergeometric_tail(n, k, d, t), brute_tail(n, k, d, t))
              << n << " " << k << " " << d << " " << t;
        }
      }
    }
  }
}

TEST(HypergeometricTail, ClosedForms) {
  EXPECT_EQ(hypergeometric_tail(10, 5, 5, 0), 1.0);
  EXPECT_DOUBLE_EQ(hypergeometric_tail(4, 2, 2, 2), 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(hypergeometric_tail(10, 5, 5, 5), 1.0 / 252.0);
  EXPECT_EQ(hypergeometric_tail(10, 5, 5, 6), 0.0);
}

// Reference values computed with exact rational arithmetic.
TEST(HypergeometricTail, FrozenReferenceValues) {
  EXPECT_NEAR(hypergeometric_tail(117, 60, 60, 33), 0.26102626959532316, 1e-12);
  EXPECT_NEAR(hypergeometric_tail(117, 60, 60, 32), 0.3934790386288535, 1e-12);
  EXPECT_NEAR(hypergeometric_tail(117, 60, 60, 40), 0.000571411334090632, 1e-15);
  EXPECT_NEAR(hypergeometric_tail(1000, 300, 200, 75), 0.006742128943229091, 1e-12);
  EXPECT_NEAR(hypergeometric_tail(10000, 5000, 5000, 2600) / 3.4386321974459314e-05, 1.0, 1e-8);
}

TEST(HypergeometricTail, MonotoneInThreshold) {
  for (std::uint64_t t = 1; t <= 61; ++t) {
    EXPECT_LE(hypergeometric_tail(117, 60, 60, t), hypergeometric_tail(117, 60, 60, t - 1));
  }
  for (std::uint64_t t = 1; t <= 501; ++t) {
    EXPECT_LE(hypergeometric_tail(2000, 700, 500, t), hypergeometric_tail(2000, 700, 500, t - 1));
  }
}

TEST(HypergeometricTail, PmfSumsToOne) {
  double sum = 0.0;
  for (std::uint64_t k = 0; k <= 60; ++k) sum += hypergeometric_pmf(117, 60, 60, k);
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(hypergeometric_pmf(10, 5, 5, 6), 0.0);
  EXPECT_EQ(hypergeometric_pmf(10, 8, 5, 2), 0.0);  // below the support
}

TEST(HypergeometricTail, DomainErrors) {
  EXPECT_THROW(hypergeometric_tail(10, 11, 5, 1), DomainError);
  EXPECT_THROW(hypergeometric_tail(10, 5, 11, 1), DomainError);
}

TEST(LogBinomial, SmallValues) {
  EXPECT_NEAR(log_binomial(10, 5), std::log(252.0), 1e-12);
  EXPECT_EQ(log_binomial(7, 0), 0.0);
  EXPECT_TRUE(std::isinf(log_binomial(3, 4)));
}

TEST(RandomIntersection, MeanAndMonteCarlo) {
  const auto dist = random_intersection_distribution(117, 5, 4);
  double total = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    total += dist[k];
    mean += static_cast<double>(k) * dist[k];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(mean / 5.0, std::pow(5.0 / 117.0, 3), 1e-12);

  const auto small = random_intersection_distribution(12, 4, 3);
  Rng rng(99);
  std::vector<std::size_t> counts(5, 0);
  const int trials = 200000;
  std::vector<std::size_t> pool(12);
  for (int t = 0; t < trials; ++t) {
    std::vector<int> hits(12, 0);
    for (int s = 0; s < 3; ++s) {
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      rng.shuffle(std::span(pool));
      for (int i = 0; i < 4; ++i) ++hits[pool[i]];
    }
    std::size_t inter = 0;
    for (const int h : hits) inter += h == 3 ? 1 : 0;
    ++counts[inter];
  }
  for (std::size_t k = 0; k < small.size(); ++k) {
    EXPECT_NEAR(double(counts[k]) / trials, small[k], 0.005) << k;
  }
}

}  // namespace
}  // namespace crowdagg
