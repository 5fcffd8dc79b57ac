#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "collab/contract_design.hpp"
#include "collab/oracles.hpp"
#include "collab/verify.hpp"

using namespace collab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Contract make(std::vector<std::pair<double, double>> items) {
  Contract c;
  for (auto [r, t] : items) c.items.push_back({r, t});
  return c;
}

UserTypeProfile fig7() {
  return UserTypeProfile({1.5, 1.0, 0.5}, {kInf, kInf, kInf}, {5, 5, 5}, TypeDistribution{120, {1.0 / 3, 1.0 / 3, 1.0 / 3}});
}

void expect_structure(const ContractSolution& s, const std::vector<double>& k) {
  EXPECT_TRUE(check_feasibility(s.contract, k, 1e-9).feasible);
  EXPECT_TRUE(oracle::enumerate_ir_ic(s.contract, k, 1e-9).empty());
  for (std::size_t i = 1; i < k.size(); ++i) {
    EXPECT_GE(s.contract.items[i].task, s.contract.items[i - 1].task);
    EXPECT_GE(s.contract.items[i].reward, s.contract.items[i - 1].reward);
    EXPECT_GE(s.payoffs[i], s.payoffs[i - 1] - 1e-12);
  }
  if (!s.involved.empty()) EXPECT_NEAR(s.payoffs[s.involved.front()], 0.0, 1e-12);
}

}  // namespace

TEST(Profile, RejectsEqualCostsWithMergeHint) {
  try {
    UserTypeProfile p({2, 2}, {1, 1}, {3, 3}, KnownTypeCounts{{1, 1}});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("merge"), std::string::npos);
  }
  EXPECT_THROW(UserTypeProfile({1, 2}, {1, 1}, {3, 3}, KnownTypeCounts{{1, 1}}), DomainError);
  EXPECT_THROW(UserTypeProfile({2, 1}, {1, 0}, {3, 3}, KnownTypeCounts{{1, 1}}), DomainError);
  EXPECT_THROW(UserTypeProfile({2, 1}, {1, 1}, {3, 3}, TypeDistribution{4, {0.5, 0.6}}), DomainError);
  EXPECT_THROW(UserTypeProfile({2, 1}, {1, 1}, {3, 3}, KnownTypeCounts{{1}}), DomainError);
}

TEST(Feasibility, Examples) {
  const std::vector<double> k{2, 1};
  EXPECT_TRUE(check_feasibility(make({{2, 1}, {3, 2}}), k).feasible);
  const auto bad = check_feasibility(make({{2, 1}, {5, 2}}), k);
  EXPECT_FALSE(bad.feasible);
  ASSERT_EQ(bad.violations.size(), 1u);
  EXPECT_EQ(bad.violations[0].condition, FeasibilityCondition::neighbor_bounds);
  EXPECT_TRUE(check_feasibility(Contract::null(3), std::vector<double>{3, 2, 1}).feasible);
  EXPECT_THROW(check_feasibility(make({{1, 1}}), k), DomainError);
}

TEST(Feasibility, ReportsEachCondition) {
  const std::vector<double> k{2, 1};
  EXPECT_EQ(check_feasibility(make({{1, 1}, {2, 1}}), k).violations.at(0).condition, FeasibilityCondition::participation);
  const auto down = check_feasibility(make({{2, 2}, {2, 1}}), k);
  bool monotone = false;
  for (const auto& v : down.violations) monotone = monotone || v.condition == FeasibilityCondition::monotone;
  EXPECT_TRUE(monotone);
}

TEST(Feasibility, MatchesIrIcEnumeration) {
  const auto rep = verify::contract_feasibility(7, 10000);
  EXPECT_TRUE(rep.ok()) << rep.mismatches.front().detail;
}

TEST(OptimalRewards, Examples) {
  EXPECT_EQ(optimal_rewards_given_tasks(std::vector<double>{1, 2}, std::vector<double>{2, 1}), (std::vector<double>{2, 3}));
  EXPECT_EQ(optimal_rewards_given_tasks(std::vector<double>{0, 0, 0}, std::vector<double>{3, 2, 1}),
            (std::vector<double>{0, 0, 0}));
  const std::vector<double> k{3, 2, 1};
  const auto c = contract_from_tasks(std::vector<double>{1, 1, 1}, k);
  EXPECT_EQ(c.items[2].reward, 3.0);
  EXPECT_EQ(user_payoffs(c, k), (std::vector<double>{0, 1, 2}));
  EXPECT_TRUE(check_feasibility(c, k).feasible);
  EXPECT_THROW(optimal_rewards_given_tasks(std::vector<double>{2, 1}, std::vector<double>{2, 1}), DomainError);
}

TEST(OptimalRewards, PointwiseMinimal) {
  RngHandle rng(4);
  for (int r = 0; r < 500; ++r) {
    const std::size_t n = 1 + rng.index(5);
    const auto k = verify::gen::decreasing_costs(rng, n, 0.25, 4, 0.25);
    std::vector<double> t(n);
    for (auto& x : t) x = 3 * rng.uniform();
    std::sort(t.begin(), t.end());
    const auto c = contract_from_tasks(t, k);
    ASSERT_TRUE(check_feasibility(c, k, 1e-12).feasible);
    const auto u = user_payoffs(c, k);
    EXPECT_NEAR(u[0], 0.0, 1e-12);
    for (std::size_t i = 1; i < n; ++i) EXPECT_GE(u[i], u[i - 1] - 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
      Contract lower = c;
      lower.items[i].reward -= 1e-4;
      EXPECT_FALSE(check_feasibility(lower, k, 1e-12).feasible) << i;
    }
  }
}

TEST(CompleteInfo, ClosedFormExamples) {
  const UserTypeProfile one({1}, {2}, {5}, KnownTypeCounts{{4}});
  const auto s = solve_complete(one);
  EXPECT_DOUBLE_EQ(s.contract.items[0].task, 1.0);
  EXPECT_DOUBLE_EQ(s.contract.items[0].reward, 1.0);
  EXPECT_NEAR(s.expected_profit, 5 * std::log(5.0) - 4, 1e-12);
  EXPECT_NEAR(realized_profit(s.contract, std::vector<int>{4}, std::vector<double>{5}), 5 * std::log(5.0) - 4, 1e-12);

  const UserTypeProfile capped({1}, {0.5}, {5}, KnownTypeCounts{{4}});
  EXPECT_DOUBLE_EQ(solve_complete(capped).contract.items[0].task, 0.5);
  EXPECT_DOUBLE_EQ(solve_complete(capped).contract.items[0].reward, 0.5);

  const UserTypeProfile excluded({1.5}, {1}, {1}, KnownTypeCounts{{3}});
  EXPECT_EQ(solve_complete(excluded).contract.items[0].task, 0.0);
  EXPECT_TRUE(solve_complete(excluded).involved.empty());
}

TEST(CompleteInfo, ZeroPayoffsAndInvolvement) {
  const UserTypeProfile p({3, 2, 1}, {kInf, kInf, kInf}, {2.5, 4, 6}, KnownTypeCounts{{5, 0, 7}});
  const auto s = solve_complete(p);
  for (double u : s.payoffs) EXPECT_NEAR(u, 0.0, 1e-15);
  EXPECT_EQ(s.involved, (std::vector<std::size_t>{2}));
  EXPECT_EQ(complete_info_involved(p), (std::vector<std::size_t>{1, 2}));
}

TEST(CompleteInfo, TaskMonotoneInPreferenceAndCost) {
  double prev = -1;
  for (double th = 1.5; th < 10; th += 0.5) {
    const double t = solve_complete(UserTypeProfile({1}, {kInf}, {th}, KnownTypeCounts{{6}})).contract.items[0].task;
    EXPECT_GE(t, prev);
    prev = t;
  }
  prev = kInf;
  for (double k = 0.2; k < 5; k += 0.2) {
    const double t = solve_complete(UserTypeProfile({k}, {kInf}, {5}, KnownTypeCounts{{6}})).contract.items[0].task;
    EXPECT_LE(t, prev);
    prev = t;
  }
}

TEST(ExpectedProfit, Examples) {
  const UserTypeProfile p({2, 1}, {kInf, kInf}, {5, 5}, TypeDistribution{1, {0.5, 0.5}});
  EXPECT_EQ(expected_profit(Contract::null(2), p), 0.0);
  const auto c = make({{1, 1}, {1, 1}});
  EXPECT_NEAR(expected_profit(c, p, ExpectationMethod::marginal), 5 * std::log(2.0) - 1, 1e-12);
  EXPECT_NEAR(expected_profit(c, p, ExpectationMethod::multinomial), 5 * std::log(2.0) - 1, 1e-12);
}

TEST(ExpectedProfit, MarginalEqualsMultinomial) {
  RngHandle rng(12);
  for (int r = 0; r < 100; ++r) {
    const int n = static_cast<int>(rng.index(16));
    const auto k = verify::gen::decreasing_costs(rng, 3, 0.25, 3, 0.25);
    const UserTypeProfile p(k, {kInf, kInf, kInf}, {1 + 4 * rng.uniform(), 1 + 4 * rng.uniform(), 1 + 4 * rng.uniform()},
                            TypeDistribution{n, verify::gen::simplex(rng, 3)});
    std::vector<double> t{rng.uniform(), rng.uniform(), rng.uniform()};
    std::sort(t.begin(), t.end());
    const auto c = contract_from_tasks(t, k);
    EXPECT_NEAR(expected_profit(c, p, ExpectationMethod::marginal), expected_profit(c, p, ExpectationMethod::multinomial),
                1e-9);
    EXPECT_NEAR(expected_profit(c, p, ExpectationMethod::multinomial),
                static_cast<double>(oracle::multinomial_expected_profit(c, p)), 1e-9);
  }
}

TEST(ExpectedProfit, MultinomialGuard) {
  const UserTypeProfile p({2, 1}, {1, 1}, {5, 5}, TypeDistribution{31, {0.5, 0.5}});
  EXPECT_THROW(expected_profit(Contract::null(2), p, ExpectationMethod::multinomial), DomainError);
}

TEST(RealizedProfit, Examples) {
  EXPECT_EQ(realized_profit(make({{1, 1}, {2, 3}}), std::vector<int>{0, 0}, std::vector<double>{5, 5}), 0.0);
  EXPECT_NEAR(realized_profit(make({{1, 1}}), std::vector<int>{4}, std::vector<double>{5}), 5 * std::log(5.0) - 4, 1e-12);
}

TEST(Incomplete, FigureSevenStructure) {
  const auto p = fig7();
  const auto s = solve_incomplete(p);
  const auto& it = s.contract.items;
  expect_structure(s, p.unit_cost());
  EXPECT_LT(it[0].task, it[1].task);
  EXPECT_LT(it[1].task, it[2].task);
  EXPECT_LT(it[0].reward, it[1].reward);
  EXPECT_LT(it[1].reward, it[2].reward);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR((it[i + 1].reward - it[i].reward) / (it[i + 1].task - it[i].task), p.unit_cost()[i + 1], 1e-6);
  }
  EXPECT_GT(it[0].reward / it[0].task, it[1].reward / it[1].task);
  EXPECT_GT(it[1].reward / it[1].task, it[2].reward / it[2].task);
  EXPECT_LT(s.payoffs[1], s.payoffs[2]);
  EXPECT_GT(s.payoffs[1], 0.0);
  EXPECT_LE(s.kkt.max_residual, s.kkt.tolerance);
  EXPECT_FALSE(s.kkt.used_fallback);
}

TEST(Incomplete, StrictlySmallerInvolvementSet) {
  const UserTypeProfile p({1.1, 0.1}, {kInf, kInf}, {1.2, 1.2}, TypeDistribution{1, {0.5, 0.5}});
  const auto s = solve_incomplete(p);
  EXPECT_EQ(s.kkt.threshold_involved, (std::vector<std::size_t>{1}));
  EXPECT_EQ(complete_info_involved(p).size(), 2u);
  EXPECT_EQ(s.contract.items[0].task, 0.0);
  EXPECT_GT(s.contract.items[1].task, 0.0);
  const auto grid = oracle::grid_contract_oracle(p, 50, 4);
  EXPECT_LE(grid.expected_profit, s.expected_profit + 1e-9);
  EXPECT_NEAR(grid.contract.items[0].task, 0.0, 0.05);
}

TEST(Incomplete, NoProfitableType) {
  const UserTypeProfile p({3, 2}, {kInf, kInf}, {2, 1.5}, TypeDistribution{10, {0.4, 0.6}});
  const auto s = solve_incomplete(p);
  EXPECT_TRUE(s.involved.empty());
  EXPECT_TRUE(s.kkt.threshold_involved.empty());
  EXPECT_EQ(s.expected_profit, 0.0);
  for (const auto& it : s.contract.items) {
    EXPECT_EQ(it.task, 0.0);
    EXPECT_EQ(it.reward, 0.0);
  }
}

TEST(Incomplete, PoolingWhenOrderBinds) {
  // A low type with much larger weight would get a bigger task unconstrained.
  const UserTypeProfile p({1.0, 0.9}, {kInf, kInf}, {20, 1}, TypeDistribution{10, {0.5, 0.5}});
  const auto s = solve_incomplete(p);
  ASSERT_EQ(s.kkt.pools.size(), 1u);
  EXPECT_DOUBLE_EQ(s.contract.items[0].task, s.contract.items[1].task);
  expect_structure(s, p.unit_cost());
  EXPECT_LE(s.kkt.max_residual, s.kkt.tolerance);
  const auto grid = oracle::grid_contract_oracle(p, 50, 6);
  EXPECT_NEAR(grid.expected_profit, s.expected_profit, 1e-3);
}

TEST(Incomplete, CapacityBinds) {
  const UserTypeProfile p({1.5, 1.0, 0.5}, {kInf, kInf, 0.1}, {5, 5, 5}, TypeDistribution{120, {1.0 / 3, 1.0 / 3, 1.0 / 3}});
  const auto s = solve_incomplete(p);
  EXPECT_DOUBLE_EQ(s.contract.items[2].task, 0.1);
  EXPECT_GT(s.kkt.capacity_multipliers[2], 0.0);
  expect_structure(s, p.unit_cost());
}

TEST(Incomplete, ProjectedGradientFallbackAgrees) {
  const auto p = fig7();
  IncompleteSolverOptions opt;
  opt.force_projected_gradient = true;
  const auto pg = solve_incomplete(p, opt);
  const auto pav = solve_incomplete(p);
  EXPECT_TRUE(pg.kkt.used_fallback);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(pg.contract.items[i].task, pav.contract.items[i].task, 1e-6);
  EXPECT_NEAR(pg.expected_profit, pav.expected_profit, 1e-9);
}

TEST(Incomplete, MatchesGridOracle) {
  verify::ContractGridOptions opt;
  opt.complete_instances = 20;
  const auto rep = verify::contract_grid(99, 20, opt);
  EXPECT_TRUE(rep.ok()) << rep.mismatches.front().detail;
}

TEST(Incomplete, RandomStructure) {
  RngHandle rng(501);
  for (int r = 0; r < 300; ++r) {
    const std::size_t n = 1 + rng.index(5);
    const auto k = verify::gen::decreasing_costs(rng, n, 0.25, 4, 0.25);
    std::vector<double> theta(n), cap(n);
    for (std::size_t i = 0; i < n; ++i) {
      theta[i] = 0.3 + 6 * rng.uniform();
      cap[i] = rng.uniform() < 0.2 ? 0.05 + rng.uniform() : kInf;
    }
    const UserTypeProfile p(k, cap, theta, TypeDistribution{1 + static_cast<int>(rng.index(150)), verify::gen::simplex(rng, n)});
    const auto s = solve_incomplete(p);
    expect_structure(s, k);
    EXPECT_LE(s.kkt.threshold_involved.size(), complete_info_involved(p).size());
    for (auto i : s.kkt.threshold_involved) EXPECT_GT(p.preference()[i], k[i]);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LE(s.contract.items[i].task, cap[i]);
  }
}

TEST(Incomplete, ObservationThreeMonotonicity) {
  double prev = -1, prev_profit = -kInf;
  for (double th = 3; th <= 9; th += 0.5) {
    const UserTypeProfile p({1.5, 1.0, 0.5}, {kInf, kInf, kInf}, {5, th, 5}, TypeDistribution{120, {1.0 / 3, 1.0 / 3, 1.0 / 3}});
    const auto s = solve_incomplete(p);
    EXPECT_GE(s.contract.items[1].task, prev - 1e-12);
    EXPECT_GE(s.expected_profit, prev_profit - 1e-12);
    prev = s.contract.items[1].task;
    prev_profit = s.expected_profit;
  }
  prev = kInf;
  for (double k3 = 0.1; k3 < 0.95; k3 += 0.05) {
    const UserTypeProfile p({1.5, 1.0, k3}, {kInf, kInf, kInf}, {5, 5, 5}, TypeDistribution{120, {1.0 / 3, 1.0 / 3, 1.0 / 3}});
    const double t = solve_incomplete(p).contract.items[2].task;
    EXPECT_LE(t, prev + 1e-12);
    prev = t;
  }
}

TEST(AggregatePayoff, Examples) {
  const auto p = UserTypeProfile({1.1, 1.0, 0.9}, {kInf, kInf, kInf}, {5, 5, 5}, TypeDistribution{120, {1.0 / 3, 1.0 / 3, 1.0 / 3}});
  const auto s = solve_incomplete(p);
  const auto k = p.unit_cost();
  EXPECT_NEAR(aggregate_user_payoff(s, k, std::vector<int>{120, 0, 0}), 0.0, 1e-10);
  const double top = aggregate_user_payoff(s, k, std::vector<int>{0, 0, 120});
  EXPECT_NEAR(top, 120 * s.payoffs[2], 1e-10);
  for (const auto& c : multinomial_compositions(120, 3)) EXPECT_LE(aggregate_user_payoff(s, k, c), top + 1e-9);
  // Nonincreasing in n1 and nondecreasing in n3 with n fixed.
  for (int n3 = 0; n3 <= 100; n3 += 10) {
    double prev = kInf;
    for (int n1 = 0; n1 + n3 <= 120; n1 += 5) {
      const double v = aggregate_user_payoff(s, k, std::vector<int>{n1, 120 - n1 - n3, n3});
      EXPECT_LE(v, prev + 1e-12);
      prev = v;
    }
  }
}
