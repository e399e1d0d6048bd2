#include <gtest/gtest.h>

#include <cmath>

#include "squadfountain/analytics.hpp"
#include "squadfountain/rng.hpp"

using namespace sqf;

namespace {

// Ripple walk from two with Poisson(lambda) - 1 increments; returns the
// absorption step, or `cap` + 1 if still alive after `cap` steps.
std::uint32_t walk(Philox& rng, double lambda, std::uint32_t cap) {
  std::int64_t ripple = 2;
  for (std::uint32_t t = 1; t <= cap; ++t) {
    ripple += static_cast<std::int64_t>(sample_poisson(rng, lambda)) - 1;
    if (ripple <= 0) {
      return t;
    }
  }
  return cap + 1;
}

}  // namespace

TEST(DegreeEvolution, StartsAtSoliton) {
  for (std::uint32_t d = 2; d <= 100; ++d) {
    EXPECT_DOUBLE_EQ(degree_evolution_pmf(100, 0, d), 1.0 / (d * (d - 1.0)));
  }
}

TEST(DegreeEvolution, HalfwayDegreeTwo) {
  EXPECT_DOUBLE_EQ(degree_evolution_pmf(1000, 500, 2), 0.25);
}

TEST(DegreeEvolution, MatchesIteratedStepRecurrence) {
  const std::uint32_t k = 50;
  const std::uint32_t ell = 10;
  // P(A_{k-l-1}=d) = P(A_{k-l}=d)(1 - d/(k-l)) + P(A_{k-l}=d+1)(d+1)/(k-l)
  std::vector<double> p(k + 2, 0.0);
  for (std::uint32_t d = 2; d <= k; ++d) {
    p[d] = 1.0 / (d * (d - 1.0));
  }
  for (std::uint32_t l = 0; l < ell; ++l) {
    const double m = k - l;
    std::vector<double> next(k + 2, 0.0);
    for (std::uint32_t d = 2; d + l < k; ++d) {
      next[d] = p[d] * (1.0 - d / m) + p[d + 1] * (d + 1) / m;
    }
    p = next;
  }
  for (std::uint32_t d = 0; d <= k; ++d) {
    EXPECT_NEAR(degree_evolution_pmf(k, ell, d), p[d], 1e-12) << d;
  }
}

TEST(UnreleasedDegrees, DegreeTwoDominates) {
  for (std::uint32_t ell : {0u, 100u, 500u, 997u}) {
    const auto u = unreleased_degree_dist(1000, ell);
    EXPECT_DOUBLE_EQ(u.raw[2], 0.5);
    EXPECT_GT(u.normalized.pmf(2), 0.5);
  }
}

TEST(UnreleasedDegrees, SupportShrinksToTwoAndThree) {
  const auto u = unreleased_degree_dist(100, 97);
  EXPECT_EQ(u.normalized.max_degree(), 3u);
  EXPECT_NEAR(u.normalized.pmf(2) + u.normalized.pmf(3), 1.0, 1e-15);
}

TEST(YieldPmf, EnumeratedAnchors) {
  const auto p = interdoping_yield_pmf(1.0, 50);
  EXPECT_EQ(p.at(0), 0.0);
  EXPECT_EQ(p.at(1), 0.0);
  EXPECT_NEAR(p.at(2), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(p.at(3), 2.0 * std::exp(-3.0), 1e-15);
  // General lambda: Y=2 needs two empty steps, Y=3 one release in the first two.
  const double l = 1.2;
  const auto q = interdoping_yield_pmf(l, 10);
  EXPECT_NEAR(q.at(2), std::exp(-2.0 * l), 1e-15);
  EXPECT_NEAR(q.at(3), 2.0 * l * std::exp(-3.0 * l), 1e-15);
}

TEST(YieldPmf, EntriesAreProbabilities) {
  for (double l : {1.0, 1.05, 1.2, 2.0}) {
    const auto p = interdoping_yield_pmf(l, 400);
    double sum = 0.0;
    for (double v : p.probs) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
      sum += v;
    }
    EXPECT_LE(sum, 1.0 + 1e-9);
    EXPECT_NEAR(p.tail, 1.0 - sum, 1e-12);
  }
}

TEST(YieldPmf, RejectsBadArguments) {
  EXPECT_THROW(interdoping_yield_pmf(0.9, 10), InvalidParameter);
  EXPECT_THROW(interdoping_yield_pmf(1.0, 1), InvalidParameter);
}

TEST(YieldPmf, MatchesRandomWalk) {
  const std::uint32_t t_max = 50;
  const auto p = interdoping_yield_pmf(1.0, t_max);
  std::vector<double> hist(t_max + 2, 0.0);
  Philox rng(17, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    hist[walk(rng, 1.0, t_max)] += 1.0 / n;
  }
  double tv = 0.0;
  for (std::uint32_t t = 0; t <= t_max; ++t) {
    tv += std::fabs(hist[t] - p.at(t));
  }
  EXPECT_LT(tv / 2.0, 0.02);
}

TEST(YieldPmf, DeltaZeroSpecialization) {
  EXPECT_EQ(yield_pmf_delta0(300).probs, interdoping_yield_pmf(1.0, 300).probs);
}

TEST(TransitionMatrix, RowsAreStochastic) {
  const auto m = ripple_transition_matrix(1.0, 60);
  EXPECT_EQ(m(1, 1), 1.0);
  for (std::uint32_t v = 2; v <= 20; ++v) {
    double sum = 0.0;
    for (std::uint32_t w = 1; w <= 60; ++w) {
      sum += m(v, w);
    }
    EXPECT_NEAR(sum, 1.0, 1e-9) << v;
  }
}

TEST(TransitionMatrix, AgreesWithRecursion) {
  for (double l : {1.0, 1.05, 1.2}) {
    const auto m = ripple_transition_matrix(l, 200);
    const auto probs = trapping_probs(m, 50);
    const auto rec = interdoping_yield_pmf(l, 50);
    for (std::uint32_t u = 1; u <= 50; ++u) {
      EXPECT_NEAR(probs[u], rec.at(u), 1e-8) << l << " " << u;
    }
  }
  EXPECT_NEAR(trapping_prob(ripple_transition_matrix(1.0, 50), 2), std::exp(-2.0), 1e-15);
}

TEST(TransitionMatrix, TrappedMassNeverShrinks) {
  const auto m = ripple_transition_matrix(1.1, 80);
  for (double v : trapping_probs(m, 60)) {
    EXPECT_GE(v, 0.0);
  }
}

TEST(Uncovered, SurplusFreeApproximationIsOne) {
  EXPECT_NEAR(uncovered_count(1000, 0.0).approx, 1.0, 1e-12);
  EXPECT_NEAR(uncovered_count(1000, 0.05).approx, std::pow(1000.0, -0.05), 1e-12);
  EXPECT_NEAR(uncovered_count(1000, 0.05).approx, 0.708, 5e-4);
}

TEST(Uncovered, ExactCloseToApproximation) {
  for (std::uint32_t k : {100u, 300u, 1000u, 5000u}) {
    for (double d : {0.0, 0.05, 0.2}) {
      const auto u = uncovered_count(k, d);
      // exact / approx = exp(draws (ln(1 - 1/k) + 1/k)), roughly exp(-(1+d) ln k / 2k)
      const double draws = k * (1.0 + d) * std::log(static_cast<double>(k));
      const double ratio = std::exp(draws * (std::log1p(-1.0 / k) + 1.0 / k));
      EXPECT_NEAR(u.exact / u.approx, ratio, 1e-12);
      EXPECT_LT(std::fabs(u.exact - u.approx) / u.approx, k >= 200 ? 0.02 : 0.03) << k << " " << d;
    }
  }
}

TEST(ExpectedYield, PointMass) {
  YieldPmf p;
  p.probs.assign(11, 0.0);
  p.probs[5] = 1.0;
  EXPECT_DOUBLE_EQ(expected_yield(p, 1000, 900.0), 5.0);
}

TEST(ExpectedYield, AllTailIsCensorBound) {
  YieldPmf p;
  p.probs.assign(11, 0.0);
  EXPECT_DOUBLE_EQ(expected_yield(p, 1000, 900.0), 100.0);
}

TEST(ExpectedYield, MatchesCensoredWalkMean) {
  const std::uint32_t k = 1000;
  const auto p = interdoping_yield_pmf(1.0, k);
  Philox rng(23, 0);
  double sum = 0.0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    sum += std::min<std::uint32_t>(walk(rng, 1.0, k), k);
  }
  const double mc = sum / n;
  EXPECT_LT(std::fabs(expected_yield(p, k, 0.0) - mc) / mc, 0.02);
}

TEST(ExpectedDopings, LargeSurplusStopsAfterOneDoping) {
  const auto pred = expected_dopings(200, 50.0);
  EXPECT_EQ(pred.stall_dopings, 1u);
}

TEST(ExpectedDopings, PercentFallsWithSurplus) {
  double last = 1e9;
  for (int i = 0; i <= 10; ++i) {
    const auto pred = expected_dopings(2000, i / 100.0);
    EXPECT_LT(pred.percent, last) << i;
    last = pred.percent;
  }
}

TEST(ExpectedDopings, TotalIncludesUncovered) {
  const auto pred = expected_dopings(1000, 0.0);
  EXPECT_DOUBLE_EQ(pred.total, pred.stall_dopings + pred.uncovered);
  EXPECT_DOUBLE_EQ(pred.percent, pred.total / 10.0);
}

TEST(Wald, MeanYieldAboveTwo) {
  for (std::uint32_t k : {100u, 1000u}) {
    const auto p = yield_pmf_delta0(k);
    EXPECT_GT(expected_yield(p, static_cast<double>(k)), 2.0);
    EXPECT_LT(wald_dopings(k), k / 2.0);
  }
}

TEST(YieldPmf, ClampedMassNegligible) {
  for (double l : {1.0, 1.05, 1.2, 1.5}) {
    EXPECT_LT(interdoping_yield_pmf(l, 2000).clamped_mass, 1e-6) << l;
  }
}
