#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "collab/acquisition_game.hpp"
#include "collab/oracles.hpp"

using namespace collab;

namespace {

AcquisitionScenario complete(std::vector<double> costs, int n0, double v, PayoffModel m = PayoffModel::A) {
  const int n = static_cast<int>(costs.size());
  return AcquisitionScenario{n, n0, v, m, CompleteInfo{KnownCosts(std::move(costs))}};
}

AcquisitionScenario symmetric(int n, int n0, double v, CostModel cm, PayoffModel m = PayoffModel::A) {
  return AcquisitionScenario{n, n0, v, m, SymmetricInfo{std::move(cm)}};
}

AcquisitionScenario asymmetric(int n, int n0, double v, CostModel cm, PayoffModel m = PayoffModel::A) {
  return AcquisitionScenario{n, n0, v, m, AsymmetricInfo{std::move(cm)}};
}

std::vector<std::size_t> collaborators(const AcquisitionEquilibrium& eq) {
  return std::get<PureProfile>(eq.stage2).collaborators;
}

}  // namespace

TEST(Scenario, Validation) {
  EXPECT_THROW(complete({1, 2}, 2, 5).validate(), DomainError);
  EXPECT_THROW(complete({1, 2}, 0, 5).validate(), DomainError);
  EXPECT_THROW(complete({1, 2, 3}, 1, -1).validate(), DomainError);
  AcquisitionScenario s = complete({1, 2, 3}, 1, 1);
  s.users = 4;
  EXPECT_THROW(s.validate(), DomainError);
}

TEST(Complete, RevenueTooSmall) {
  const auto eq = solve_complete(complete({1, 2, 3}, 2, 3));
  EXPECT_EQ(eq.reward, 0.0);
  EXPECT_EQ(eq.master_profit, 0.0);
  EXPECT_TRUE(collaborators(eq).empty());
}

TEST(Complete, HiresCheapestAtTheirPrice) {
  const auto eq = solve_complete(complete({1, 2, 3, 4}, 2, 10));
  EXPECT_EQ(eq.reward, 4.0);
  EXPECT_EQ(eq.master_profit, 6.0);
  EXPECT_EQ(collaborators(eq), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(eq.user_payoffs, (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(eq.success_prob, 1.0);
}

TEST(Complete, SingleCollaborator) {
  const auto eq = solve_complete(complete({2, 5}, 1, 10));
  EXPECT_EQ(eq.reward, 2.0);
  EXPECT_EQ(eq.master_profit, 8.0);
  EXPECT_EQ(collaborators(eq), (std::vector<std::size_t>{0}));
}

TEST(Complete, UnsortedCostsAndModelB) {
  const auto a = solve_complete(complete({4, 1, 3, 2}, 2, 10, PayoffModel::A));
  const auto b = solve_complete(complete({4, 1, 3, 2}, 2, 10, PayoffModel::B));
  EXPECT_EQ(collaborators(a), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(a.reward, b.reward);
  EXPECT_EQ(a.master_profit, b.master_profit);
  EXPECT_EQ(collaborators(a), collaborators(b));
}

TEST(Complete, TiesAreFlagged) {
  const auto eq = solve_complete(complete({2, 1, 2, 5}, 2, 10));
  EXPECT_EQ(eq.reward, 4.0);
  EXPECT_EQ(collaborators(eq), (std::vector<std::size_t>{0, 1}));
  EXPECT_FALSE(eq.diagnostics.empty());
}

TEST(Complete, MatchesExhaustiveEnumeration) {
  RngHandle rng(31);
  for (int r = 0; r < 300; ++r) {
    const int n = 2 + static_cast<int>(rng.index(5));
    const int n0 = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n - 1)));
    std::vector<double> costs(n);
    for (auto& c : costs) c = 0.25 + 0.125 * static_cast<double>(rng.index(40));
    const double v = 0.5 * static_cast<double>(rng.index(60));
    for (auto m : {PayoffModel::A, PayoffModel::B}) {
      const auto eq = solve_complete(complete(costs, n0, v, m));
      const auto truth = oracle::complete_info_master(costs, n0, v, m);
      ASSERT_DOUBLE_EQ(eq.reward, truth.reward);
      ASSERT_DOUBLE_EQ(eq.master_profit, truth.profit);
    }
  }
}

TEST(SymmetricPure, Examples) {
  const auto none = solve_symmetric_pure(symmetric(5, 3, 5, CostModel::uniform(4)));
  EXPECT_EQ(none.reward, 0.0);
  EXPECT_EQ(none.master_profit, 0.0);

  const auto eq = solve_symmetric_pure(symmetric(5, 3, 10, CostModel::uniform(4)));
  EXPECT_EQ(eq.reward, 6.0);
  EXPECT_EQ(eq.master_profit, 4.0);
  EXPECT_EQ(eq.success_prob, 1.0);
  EXPECT_EQ(collaborators(eq), (std::vector<std::size_t>{0, 1, 2}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(eq.user_payoffs[i], 0.0);

  const auto b = solve_symmetric_pure(symmetric(5, 3, 10, CostModel::uniform(4), PayoffModel::B));
  EXPECT_EQ(b.reward, 6.0);
  EXPECT_EQ(b.master_profit, 4.0);
}

TEST(SymmetricPure, CountFloorsRewardOverMean) {
  const auto s = symmetric(10, 2, 10, CostModel::gaussian(1, 0.3));
  EXPECT_EQ(symmetric_pure_count(s, 4.7), 4);
  EXPECT_EQ(symmetric_pure_count(s, 4.0), 4);
  EXPECT_EQ(symmetric_pure_count(s, 0.5), 0);
  EXPECT_EQ(symmetric_pure_count(s, 50), 10);
}

TEST(SymmetricPure, NoDeviationAtFloorCount) {
  const auto s = symmetric(40, 3, 100, CostModel::uniform(3));  // mu = 1.5
  for (double r = 4.5; r < 60; r += 0.37) {
    const int n = symmetric_pure_count(s, r);
    EXPECT_GE(r / n - 1.5, 0.0);
    EXPECT_LT(r / (n + 1) - 1.5, 0.0);
  }
}

TEST(SymmetricPure, CountMatchesEnumerationWithMeanCosts) {
  const double mu = 1.25;
  const auto s = symmetric(6, 2, 100, CostModel::empirical({0.5, 2.0}));
  for (double r = 2.5; r < 7.5; r += 0.3) {
    const int n = symmetric_pure_count(s, r);
    const std::vector<double> costs(6, mu);
    for (const auto& p : oracle::enumerate_pure_ne(costs, r, 2, PayoffModel::A)) {
      const auto k = std::count(p.begin(), p.end(), true);
      if (k >= 2) EXPECT_EQ(k, n) << r;
    }
  }
}

TEST(SymmetricMixed, HandReducedExample) {
  const auto s = symmetric(3, 2, 10, CostModel::uniform(2));  // mu = 1
  const auto p = solve_symmetric_mixed(s, 2.5);
  ASSERT_TRUE(p.has_value());
  EXPECT_NEAR(*p, 0.75, 1e-10);
  EXPECT_LE(std::abs(mixed_indifference(s, 2.5, *p)), 1e-10);
  const auto scan = oracle::dense_root_scan([&](double x) { return mixed_indifference(s, 2.5, x); }, 1e-6, 1 - 1e-6, 2001);
  ASSERT_EQ(scan.size(), 1u);
  EXPECT_LE(scan[0].lo, 0.75);
  EXPECT_GE(scan[0].hi, 0.75);
}

TEST(SymmetricMixed, BoundaryRewardsHaveNoMixedEquilibrium) {
  const auto s = symmetric(3, 2, 10, CostModel::uniform(2));
  EXPECT_FALSE(solve_symmetric_mixed(s, 2.0).has_value());
  EXPECT_FALSE(solve_symmetric_mixed(s, 3.0).has_value());
  EXPECT_FALSE(solve_symmetric_mixed(s, 4.0).has_value());
  EXPECT_FALSE(solve_symmetric_mixed(s, 1.0).has_value());
}

TEST(SymmetricMixed, IndifferenceHoldsAcrossRange) {
  const auto s = symmetric(30, 10, 100, CostModel::uniform(4));  // mu = 2
  for (double r = 20.5; r < 60; r += 1.9) {
    const auto p = solve_symmetric_mixed(s, r);
    ASSERT_TRUE(p.has_value()) << r;
    EXPECT_GT(*p, 0.0);
    EXPECT_LT(*p, 1.0);
    EXPECT_LE(std::abs(mixed_indifference(s, r, *p)), 1e-10) << r;
  }
}

TEST(SymmetricMixed, ModelBNeedsLargerReward) {
  const auto b = symmetric(3, 2, 10, CostModel::uniform(2), PayoffModel::B);
  EXPECT_FALSE(solve_symmetric_mixed(b, 2.1).has_value());
  const auto p = solve_symmetric_mixed(b, 2.9);
  ASSERT_TRUE(p.has_value());
  EXPECT_LE(std::abs(mixed_indifference(b, 2.9, *p)), 1e-10);
}

TEST(MixedProfitCurve, HandValueAndBound) {
  const auto s = symmetric(3, 2, 10, CostModel::uniform(2));
  const auto curve = mixed_profit_curve(s, RewardGrid(41));  // step 0.25, hits 2.5
  bool found = false;
  for (const auto& pt : curve) {
    EXPECT_GT(pt.reward, 2.0);
    EXPECT_LT(pt.reward, 3.0);
    EXPECT_LE(pt.profit, 10.0);
    if (std::abs(pt.reward - 2.5) < 1e-12) {
      found = true;
      EXPECT_NEAR(pt.success_prob, 0.84375, 1e-9);
      EXPECT_NEAR(pt.profit, 7.5 * 0.84375, 1e-9);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Threshold, FigureTwoValue) {
  const auto s = asymmetric(100, 40, 150, CostModel::uniform(4));
  const auto g = solve_asymmetric_threshold(s, 100);
  ASSERT_TRUE(g.has_value());
  EXPECT_NEAR(*g, 2.0, 0.05);
  EXPECT_NEAR(expected_collaborators(s, 100), 50.0, 1.5);
}

TEST(Threshold, TwoUserHandReduction) {
  const auto s = asymmetric(2, 1, 4, CostModel::uniform(4));
  const auto g = solve_asymmetric_threshold(s, 2);
  ASSERT_TRUE(g.has_value());
  EXPECT_NEAR(*g, 1.6, 1e-10);
  EXPECT_NEAR(threshold_gap(s, 2, 1.0), 2 - 1.25, 1e-12);
  EXPECT_NEAR(expected_collaborators(s, 2), 0.8, 1e-9);
  const auto scan = oracle::dense_root_scan([&](double x) { return threshold_gap(s, 2, x); }, 1.0 + 1e-9, 2.0 - 1e-9, 1001);
  ASSERT_EQ(scan.size(), 1u);
  EXPECT_LE(scan[0].lo, 1.6);
  EXPECT_GE(scan[0].hi, 1.6);
}

TEST(Threshold, ZeroReward) {
  const auto s = asymmetric(10, 3, 5, CostModel::uniform(4));
  EXPECT_EQ(*solve_asymmetric_threshold(s, 0), 0.0);
  EXPECT_EQ(expected_collaborators(s, 0), 0.0);
}

TEST(Threshold, StrictlyInsideBracket) {
  RngHandle rng(17);
  for (int r = 0; r < 100; ++r) {
    const int n = 5 + static_cast<int>(rng.index(120));
    const int n0 = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n - 1)));
    const double b = 1 + 5 * rng.uniform();
    const double reward = (0.05 + 0.9 * rng.uniform()) * n * b;
    const auto s = asymmetric(n, n0, reward, CostModel::uniform(b));
    const auto g = solve_asymmetric_threshold(s, reward);
    ASSERT_TRUE(g.has_value());
    EXPECT_GT(*g, reward / n);
    EXPECT_LT(*g, reward / n0);
  }
}

TEST(Threshold, TinyGaussianRewardDoesNotThrow) {
  const auto s = asymmetric(80, 55, 210, CostModel::gaussian(3, 0.5));
  const auto g = solve_asymmetric_threshold(s, 0.21);
  ASSERT_TRUE(g.has_value());
  EXPECT_GE(*g, 0.21 / 80);
  EXPECT_LE(*g, 0.21 / 55);
  EXPECT_NEAR(asymmetric_expected_profit(s, 0.21), 0.0, 1e-12);
}

TEST(Threshold, ExpectedCollaboratorsIsBinomialMean) {
  const auto s = asymmetric(60, 30, 100, CostModel::uniform(3));
  for (double r : {20.0, 50.0, 77.0}) {
    const auto g = solve_asymmetric_threshold(s, r);
    const BinomialSpec spec(60, s.cost_model().cdf(*g));
    EXPECT_NEAR(expected_collaborators(s, r), binom_expect(spec, [](int k) { return k; }), 1e-9);
  }
}

TEST(Threshold, IncreasingInReward) {
  const auto s = asymmetric(100, 40, 400, CostModel::uniform(4));
  double prev = 0;
  for (double r = 10; r <= 390; r += 20) {
    const double g = *solve_asymmetric_threshold(s, r);
    EXPECT_GT(g, prev);
    prev = g;
  }
}

TEST(Threshold, ModelBLargestRoot) {
  const auto s = asymmetric(10, 3, 50, CostModel::uniform(4), PayoffModel::B);
  const auto g = solve_asymmetric_threshold(s, 20);
  ASSERT_TRUE(g.has_value());
  EXPECT_NEAR(threshold_gap(s, 20, *g), 0.0, 1e-8);
  const auto roots = oracle::dense_root_scan([&](double x) { return threshold_gap(s, 20, x); }, 1e-9, 20.0 / 3, 20001);
  ASSERT_FALSE(roots.empty());
  EXPECT_GE(*g, roots.back().lo - 1e-9);
}

TEST(Threshold, ModelBNoRootForSmallReward) {
  const auto s = asymmetric(10, 5, 50, CostModel::uniform(4), PayoffModel::B);
  EXPECT_FALSE(solve_asymmetric_threshold(s, 0.5).has_value());
  EXPECT_EQ(asymmetric_success_probability(s, 0.5), 0.0);
}

TEST(Optimize, TwoUserToy) {
  const auto s = asymmetric(2, 1, 4, CostModel::uniform(4));
  const auto eq = optimize_reward_asymmetric(s, RewardGrid(4001));
  EXPECT_NEAR(eq.reward, 1.6, 4.0 / 4000);
  EXPECT_NEAR(eq.master_profit, 4.0 / 3.0, 1e-3);
  const auto best = oracle::grid_maximize(
      [](double r) { return 32 * r * (4 - r) / ((8 + r) * (8 + r)); }, 0, 4, 4001);
  EXPECT_NEAR(best.x, 1.6, 1e-3);
  EXPECT_NEAR(eq.master_profit, best.value, 1e-6);
  for (double r : {0.5, 1.0, 2.5, 3.5}) {
    EXPECT_NEAR(asymmetric_expected_profit(s, r), 32 * r * (4 - r) / ((8 + r) * (8 + r)), 1e-9);
  }
}

TEST(Optimize, ZeroRevenue) {
  const auto eq = optimize_reward_asymmetric(asymmetric(10, 3, 0, CostModel::uniform(4)), RewardGrid(11));
  EXPECT_EQ(eq.reward, 0.0);
  EXPECT_EQ(eq.master_profit, 0.0);
}

TEST(Optimize, ProfitBoundsAndProbability) {
  const auto s = asymmetric(60, 30, 100, CostModel::uniform(3));
  const auto eq = optimize_reward_asymmetric(s, RewardGrid(501));
  EXPECT_GE(eq.success_prob, 0.0);
  EXPECT_LE(eq.success_prob, 1.0);
  EXPECT_LE(eq.master_profit, 100.0);
  EXPECT_NEAR(eq.master_profit, (100 - eq.reward) * eq.success_prob, 1e-9);
}

TEST(Optimize, TiesGoToSmallerReward) {
  // f(R) = 0 everywhere (nobody can reach n0 with positive probability before R = V).
  const auto s = asymmetric(3, 2, 1, CostModel::uniform(100));
  const auto eq = optimize_reward_asymmetric(s, RewardGrid(11));
  EXPECT_GT(eq.master_profit, 0.0);
  const auto flat = optimize_reward_asymmetric(asymmetric(3, 2, 0, CostModel::uniform(1)), RewardGrid(11));
  EXPECT_EQ(flat.reward, 0.0);
}

TEST(Compare, AsymmetricNeverBeatsSymmetric) {
  for (int n : {35, 45, 60, 90}) {
    const auto c = compare_information_scenarios(n, 30, 100, CostModel::uniform(3), RewardGrid(401));
    EXPECT_EQ(c.symmetric_profit, 100 - 30 * 1.5);
    EXPECT_LE(c.asymmetric_profit_a, 10.0 + 45.0);
    EXPECT_TRUE(c.asymmetric_not_above_symmetric);
  }
  const auto low = compare_information_scenarios(40, 30, 20, CostModel::uniform(3), RewardGrid(201));
  EXPECT_EQ(low.symmetric_profit, 0.0);
  EXPECT_TRUE(low.asymmetric_not_above_symmetric);
}

TEST(Compare, ModelBRewardNotBelowModelA) {
  for (int n : {40, 60, 90}) {
    const auto c = compare_information_scenarios(n, 30, 100, CostModel::uniform(3), RewardGrid(201));
    EXPECT_TRUE(c.model_b_reward_not_below_a) << n << ": A " << c.asymmetric_reward_a << " B " << c.asymmetric_reward_b;
  }
}

TEST(Compare, ModelBMasterDeclinesAtHighThreshold) {
  // With n0 = 55 of 80 and mu = 3 no Model B threshold yields positive profit,
  // so the master offers nothing while Model A pays close to V.
  const auto c = compare_information_scenarios(80, 55, 210, CostModel::gaussian(3, 1), RewardGrid(101));
  EXPECT_EQ(c.asymmetric_reward_b, 0.0);
  EXPECT_GT(c.asymmetric_reward_a, 150.0);
  EXPECT_FALSE(c.model_b_reward_not_below_a);
}
