#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "squadfountain/degree_distribution.hpp"
#include "squadfountain/rng.hpp"

using namespace sqf;

TEST(IdealSoliton, HalfTheMassOnDegreeTwo) {
  EXPECT_DOUBLE_EQ(ideal_soliton(1000).pmf(2), 0.5);
}

TEST(IdealSoliton, SmallestBlock) {
  const auto d = ideal_soliton(2);
  EXPECT_DOUBLE_EQ(d.pmf(1), 0.5);
  EXPECT_DOUBLE_EQ(d.pmf(2), 0.5);
}

TEST(IdealSoliton, TelescopesToOne) {
  const auto d = ideal_soliton(10);
  double sum = 0.0;
  for (std::uint32_t i = 1; i <= 10; ++i) {
    sum += d.pmf(i);
  }
  EXPECT_NEAR(sum, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(d.pmf(1), 0.1);
  EXPECT_DOUBLE_EQ(d.pmf(7), 1.0 / 42.0);
}

TEST(IdealSoliton, RejectsTinyBlocks) {
  EXPECT_THROW(ideal_soliton(1), InvalidParameter);
}

TEST(RobustSoliton, NormalizedAndHeavierOnDegreeOne) {
  const auto rs = robust_soliton(1000, 0.1, 0.5);
  const auto& m = rs.masses();
  EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), 1.0, 1e-12);
  EXPECT_GT(rs.pmf(1), ideal_soliton(1000).pmf(1));
}

TEST(RobustSoliton, SpikeAtCeilKOverR) {
  const std::uint32_t k = 1000;
  const double r = 0.1 * std::log(k / 0.5) * std::sqrt(static_cast<double>(k));
  const auto spike = static_cast<std::uint32_t>(std::ceil(k / r));
  const auto rs = robust_soliton(k, 0.1, 0.5);
  EXPECT_EQ(robust_soliton_shape(k, 0.1, 0.5).spike, spike);
  for (std::uint32_t d = 3; d <= k; ++d) {
    if (d != spike) {
      EXPECT_LT(rs.pmf(d), rs.pmf(d - 1)) << d;
    }
  }
  EXPECT_GT(rs.pmf(spike), rs.pmf(spike - 1));
  EXPECT_GT(rs.pmf(spike), rs.pmf(spike + 1));
}

TEST(RobustSoliton, RejectsSpikeBeyondBlock) {
  EXPECT_THROW(robust_soliton(10, 5.0, 0.5), InvalidParameter);
}

TEST(SampleDegree, PointMassIsDeterministic) {
  Philox rng(1, 0);
  const auto d = point_mass(2);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_degree(d, rng), 2u);
  }
}

TEST(SampleDegree, DegreeTwoFrequencyMatches) {
  Philox rng(7, 0);
  const auto d = ideal_soliton(1000);
  int twos = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    twos += sample_degree(d, rng) == 2 ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(twos) / n, 0.5, 0.005);
}

TEST(SampleDegree, SameSeedSameSequence) {
  Philox a(99, 3);
  Philox b(99, 3);
  const auto d = robust_soliton(500);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(sample_degree(d, a), sample_degree(d, b));
  }
}

TEST(Poisson, PmfClosedForms) {
  EXPECT_NEAR(poisson_pmf(1.0, 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(poisson_pmf(1.0, 2), std::exp(-1.0) / 2.0, 1e-15);
  EXPECT_EQ(poisson_pmf(1.0, -1), 0.0);
}

TEST(Poisson, TruncatedBeyondSupportIsZero) {
  EXPECT_EQ(truncated_poisson_pmf(1.0, 6, 5), 0.0);
  double sum = 0.0;
  double cdf = 0.0;
  double term = std::exp(-1.0);
  for (std::uint64_t r = 0; r <= 5; ++r) {
    sum += truncated_poisson_pmf(1.0, r, 5);
    cdf += term;
    term /= static_cast<double>(r + 1);
  }
  EXPECT_NEAR(sum, cdf, 1e-14);
  EXPECT_NEAR(truncated_poisson_pmf(50.0, 400, 1000), poisson_pmf(50.0, 400), 1e-300);
}

TEST(Poisson, SampleMeanMatches) {
  Philox rng(3, 0);
  for (double mean : {0.7, 4.0, 200.0}) {
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      sum += static_cast<double>(sample_poisson(rng, mean));
    }
    EXPECT_NEAR(sum / n, mean, 4.0 * std::sqrt(mean / n)) << mean;
  }
}

TEST(Rng, DistinctSamplesAreSortedAndUnique) {
  Philox rng(5, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = sample_distinct(rng, 20, 7);
    ASSERT_EQ(s.size(), 7u);
    for (std::size_t i = 1; i < s.size(); ++i) {
      ASSERT_LT(s[i - 1], s[i]);
    }
    ASSERT_LT(s.back(), 20u);
  }
}

TEST(Rng, TrialStreamsDiffer) {
  auto a = Philox::for_trial(1, 0);
  auto b = Philox::for_trial(1, 1);
  EXPECT_NE(a(), b());
}
