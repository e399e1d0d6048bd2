#include <gtest/gtest.h>

#include <cmath>

#include "squadfountain/cost.hpp"

using namespace sqf;

TEST(Supersquad, SquadCounts) {
  EXPECT_EQ(supersquad_squads(1000, 200), 5u);
  EXPECT_EQ(supersquad_squads(0, 50), 0u);
  EXPECT_EQ(supersquad_squads(201, 100), 3u);
  EXPECT_EQ(supersquad_squads(1000.0000000001, 200), 5u);
}

TEST(CollectionCost, PurePolling) {
  EXPECT_DOUBLE_EQ(collection_cost(2000, 0, 2000, 10), 500.0);
  EXPECT_DOUBLE_EQ(collection_cost(1001, 0, 1001, 10), 251.0);
}

TEST(CollectionCost, SingleSquadPlugIn) {
  EXPECT_DOUBLE_EQ(collection_cost(2000, 2000, 0, 2000), 1.5);
  EXPECT_DOUBLE_EQ(collection_cost(2000, 2000, 0, 2000, HopModel::sec2), 1.0);
}

TEST(CollectionCost, MixedPlugIn) {
  // s = 5, c_s = 1 + 6/4, c_d = 250
  const double want = (2.5 * 1000 + 250.0 * 12) / 1000;
  EXPECT_DOUBLE_EQ(collection_cost(1000, 1000, 12, 200), want);
}

TEST(Strategies, PollingCostsQuarterRing) {
  const auto pt = strategy_cost(Strategy::polling, 2000, 10, {});
  EXPECT_DOUBLE_EQ(pt.c_T, 500.0);
  EXPECT_DOUBLE_EQ(pt.normalized(), 1.0);
}

TEST(Strategies, CouponUsesHarmonicCoverage) {
  const std::uint32_t k = 100;
  double h_k = 0.0;
  for (int i = 1; i <= 100; ++i) {
    h_k += 1.0 / i;
  }
  const auto pt = strategy_cost(Strategy::coupon, k, 50, {});
  EXPECT_NEAR(pt.k_s, k * h_k, 1e-9);
  EXPECT_NEAR(pt.k_d, k * std::pow(0.99, k * h_k), 1e-9);
}

TEST(Strategies, RobustSolitonSymbolCount) {
  const auto pt = strategy_cost(Strategy::rs_no_doping, 1000, 50, {});
  const double l = std::log(1000 / 0.5);
  EXPECT_NEAR(pt.k_s, 1000 + std::sqrt(1000.0) * l * l, 1e-9);
  EXPECT_EQ(pt.k_d, 0.0);
}

TEST(Strategies, IdealSolitonUsesPrediction) {
  StrategyParams p;
  p.delta = 0.02;
  const auto pt = strategy_cost(Strategy::is_doping, 1000, 50, p);
  EXPECT_DOUBLE_EQ(pt.k_s, 1020.0);
  EXPECT_DOUBLE_EQ(pt.k_d, expected_dopings(1000, 0.02).total);
}

TEST(Strategies, UnknownNameRejected) {
  EXPECT_THROW(parse_strategy("flood"), InvalidParameter);
  EXPECT_EQ(parse_strategy("rs"), Strategy::rs_no_doping);
}

TEST(Minimize, DegenerateGrid) {
  EXPECT_DOUBLE_EQ(minimize_cost(2000, 10, {0.03}).delta, 0.03);
}

TEST(Minimize, TiesGoToSmallestDelta) {
  const auto m = minimize_cost(1000, 10, {0.02, 0.02});
  EXPECT_DOUBLE_EQ(m.delta, 0.02);
  EXPECT_EQ(m.curve.size(), 2u);
}

TEST(Minimize, OperatingPointsGrowWithRedundancy) {
  const auto grid = linear_grid(0.0, 0.06, 0.005);
  const double at10 = minimize_cost(2000, 10, grid).delta;
  const double at30 = minimize_cost(2000, 30, grid).delta;
  EXPECT_NEAR(at10, 0.01, 0.01);
  EXPECT_NEAR(at30, 0.04, 0.01);
  EXPECT_LT(at10, at30);
}

TEST(Grid, InclusiveAndRounded) {
  const auto g = linear_grid(0.0, 0.06, 0.01);
  ASSERT_EQ(g.size(), 7u);
  EXPECT_EQ(g[3], 0.03);
  EXPECT_THROW(linear_grid(1, 0, 0.1), InvalidParameter);
}
