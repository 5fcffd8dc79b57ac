#pragma once

// Randomized solver-vs-oracle agreement suites. Instance k of a run with
// master seed s is generated from derive_seed(s, k), so any reported
// instance can be replayed on its own.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "collab/acquisition_game.hpp"
#include "collab/contract_design.hpp"
#include "collab/oracles.hpp"
#include "collab/prob_kernels.hpp"

namespace collab::verify {

struct Mismatch {
  std::size_t instance;
  std::uint64_t seed;
  std::string detail;
};

struct Report {
  std::string suite;
  std::size_t instances = 0;
  std::size_t checks = 0;
  std::vector<Mismatch> mismatches;

  explicit Report(std::string name) : suite(std::move(name)) {}
  bool ok() const { return mismatches.empty(); }
};

namespace gen {

inline int uniform_int(RngHandle& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1)));
}

// Multiple of `step` in [lo, hi]; dyadic steps keep products exact.
inline double lattice(RngHandle& rng, double lo, double hi, double step) {
  const int n = static_cast<int>(std::floor((hi - lo) / step));
  return lo + step * uniform_int(rng, 0, n);
}

// I distinct lattice values, sorted strictly decreasing.
inline std::vector<double> decreasing_costs(RngHandle& rng, std::size_t types, double lo, double hi, double step) {
  std::vector<double> k;
  while (k.size() < types) {
    const double v = lattice(rng, lo, hi, step);
    if (std::find(k.begin(), k.end(), v) == k.end()) k.push_back(v);
  }
  std::sort(k.begin(), k.end(), std::greater<>());
  return k;
}

inline std::vector<double> simplex(RngHandle& rng, std::size_t n) {
  std::vector<double> q(n);
  double total = 0.0;
  for (auto& x : q) {
    x = 0.05 + rng.uniform();
    total += x;
  }
  for (auto& x : q) x /= total;
  return q;
}

}  // namespace gen

/// Complete-information acquisition: solver R*, profit and collaborator set
/// against exhaustive equilibrium enumeration over every candidate reward.
inline Report acquisition_ne(std::uint64_t seed, std::size_t instances, int max_users = 6) {
  Report rep("acq-ne");
  for (std::size_t k = 0; k < instances; ++k) {
    const std::uint64_t s = derive_seed(seed, k);
    RngHandle rng(s);
    const int n = gen::uniform_int(rng, 2, max_users);
    const int n0 = gen::uniform_int(rng, 1, n - 1);
    std::vector<double> costs(n);
    for (auto& c : costs) c = gen::lattice(rng, 0.25, 5.0, 0.0625);
    const double revenue = gen::lattice(rng, 0.0, 4.0 * n0 * 5.0 / 2.0, 0.125);
    const PayoffModel model = rng.uniform() < 0.5 ? PayoffModel::A : PayoffModel::B;
    ++rep.instances;

    AcquisitionScenario sc{n, n0, revenue, model, CompleteInfo{KnownCosts(costs)}};
    const auto eq = solve_complete(sc);
    const auto truth = oracle::complete_info_master(costs, n0, revenue, model);
    auto fail = [&](const std::string& what) {
      std::ostringstream d;
      d << what << " (N=" << n << " n0=" << n0 << " V=" << revenue << " model=" << to_string(model) << " costs=";
      for (double c : costs) d << c << ' ';
      d << "solver R*=" << eq.reward << " oracle R*=" << truth.reward << ")";
      rep.mismatches.push_back({k, s, d.str()});
    };
    ++rep.checks;
    if (std::abs(eq.reward - truth.reward) > 1e-9 || std::abs(eq.master_profit - truth.profit) > 1e-9) {
      fail("reward/profit disagree");
      continue;
    }
    // The solver's own profile must be an equilibrium at its own reward.
    oracle::StrategyProfile mine(n, false);
    for (auto i : std::get<PureProfile>(eq.stage2).collaborators) mine[i] = true;
    const auto all = oracle::enumerate_pure_ne(costs, eq.reward, n0, model);
    ++rep.checks;
    if (std::find(all.begin(), all.end(), mine) == all.end()) fail("solver profile is not an equilibrium");
    // Collaborator payoffs C_(n0) - C_i.
    ++rep.checks;
    for (int i = 0; i < n; ++i) {
      const double expect = mine[i] ? oracle::collaborator_payoff(eq.reward, n0, n0, costs[i], model) : 0.0;
      if (eq.reward > 0.0 && std::abs(eq.user_payoffs[i] - expect) > 1e-9) {
        fail("user payoff mismatch");
        break;
      }
    }
  }
  return rep;
}

/// Three-condition feasibility verdict against all I^2 IR/IC constraints.
/// Half the contracts are built feasible and then perturbed.
inline Report contract_feasibility(std::uint64_t seed, std::size_t instances, std::size_t max_types = 5) {
  Report rep("contract-feas");
  for (std::size_t k = 0; k < instances; ++k) {
    const std::uint64_t s = derive_seed(seed, k);
    RngHandle rng(s);
    const auto types = static_cast<std::size_t>(gen::uniform_int(rng, 1, static_cast<int>(max_types)));
    const auto costs = gen::decreasing_costs(rng, types, 0.25, 4.0, 0.25);
    Contract c = Contract::null(types);
    if (rng.uniform() < 0.5) {
      for (auto& it : c.items) it = {gen::lattice(rng, 0.0, 8.0, 0.0625), gen::lattice(rng, 0.0, 4.0, 0.125)};
    } else {
      std::vector<double> t(types);
      for (auto& x : t) x = gen::lattice(rng, 0.0, 4.0, 0.125);
      std::sort(t.begin(), t.end());
      c = contract_from_tasks(t, costs);
      // Optional upward slack within the neighbor band, then a random nudge.
      for (std::size_t i = 0; i < types; ++i) {
        if (rng.uniform() < 0.3) {
          const double nudge = 0.0625 * gen::uniform_int(rng, -2, 2);
          for (std::size_t j = i; j < types; ++j) c.items[j].reward = std::max(0.0, c.items[j].reward + nudge);
        }
        if (rng.uniform() < 0.2) c.items[i].task = std::max(0.0, c.items[i].task + 0.125 * gen::uniform_int(rng, -1, 1));
      }
    }
    ++rep.instances;
    ++rep.checks;
    const bool verdict = check_feasibility(c, costs).feasible;
    const bool truth = oracle::enumerate_ir_ic(c, costs).empty();
    if (verdict != truth) {
      std::ostringstream d;
      d << "three-condition says " << (verdict ? "feasible" : "infeasible") << ", IR/IC enumeration says "
        << (truth ? "feasible" : "infeasible") << "; K=";
      for (double x : costs) d << x << ' ';
      d << "items=";
      for (const auto& it : c.items) d << '(' << it.reward << ',' << it.task << ") ";
      rep.mismatches.push_back({k, s, d.str()});
    }
  }
  return rep;
}

struct ContractGridOptions {
  std::size_t complete_instances = 100;
  double complete_rel_tol = 1e-6;
  double incomplete_abs_tol = 1e-3;
  int max_users = 10;
  int resolution = 50;
  int refinements = 6;
};

/// Complete-information closed form against a per-type 1-D grid maximum,
/// and the incomplete-information solver against the multinomial grid oracle
/// (I = 2).
inline Report contract_grid(std::uint64_t seed, std::size_t instances, const ContractGridOptions& opt = {}) {
  Report rep("contract-grid");
  for (std::size_t k = 0; k < opt.complete_instances; ++k) {
    const std::uint64_t s = derive_seed(seed, k);
    RngHandle rng(s);
    const auto types = static_cast<std::size_t>(gen::uniform_int(rng, 1, 4));
    const auto costs = gen::decreasing_costs(rng, types, 0.25, 4.0, 0.25);
    std::vector<double> theta(types), cap(types);
    std::vector<int> counts(types);
    for (std::size_t i = 0; i < types; ++i) {
      theta[i] = 0.5 + 7.5 * rng.uniform();
      cap[i] = rng.uniform() < 0.3 ? 0.05 + rng.uniform() : std::numeric_limits<double>::infinity();
      counts[i] = gen::uniform_int(rng, 0, 20);
    }
    const UserTypeProfile p(costs, cap, theta, KnownTypeCounts{counts});
    const auto sol = solve_complete(p);
    double truth = 0.0;
    for (std::size_t i = 0; i < types; ++i) {
      const double n = counts[i];
      const double hi = std::min(cap[i], theta[i] / costs[i]);
      const auto best = oracle::grid_maximize(
          [&](double t) { return theta[i] * std::log1p(n * t) - n * costs[i] * t; }, 0.0, hi, 2001, 40);
      truth += std::max(0.0, best.value);
    }
    ++rep.instances;
    ++rep.checks;
    const double scale = std::max(1.0, std::abs(truth));
    if (std::abs(sol.expected_profit - truth) > opt.complete_rel_tol * scale) {
      std::ostringstream d;
      d << "complete-info profit " << sol.expected_profit << " vs grid " << truth;
      rep.mismatches.push_back({k, s, d.str()});
    }
  }
  for (std::size_t k = 0; k < instances; ++k) {
    const std::uint64_t s = derive_seed(seed ^ 0x5bd1e995u, k);
    RngHandle rng(s);
    const auto costs = gen::decreasing_costs(rng, 2, 0.25, 3.0, 0.25);
    const std::vector<double> theta{0.5 + 4.5 * rng.uniform(), 0.5 + 4.5 * rng.uniform()};
    std::vector<double> cap(2, std::numeric_limits<double>::infinity());
    if (rng.uniform() < 0.3) cap[gen::uniform_int(rng, 0, 1)] = 0.1 + rng.uniform();
    const int users = gen::uniform_int(rng, 1, opt.max_users);
    const UserTypeProfile p(costs, cap, theta, TypeDistribution{users, gen::simplex(rng, 2)});
    const auto sol = solve_incomplete(p);
    const auto grid = oracle::grid_contract_oracle(p, opt.resolution, opt.refinements);
    ++rep.instances;
    ++rep.checks;
    if (std::abs(sol.expected_profit - grid.expected_profit) > opt.incomplete_abs_tol ||
        grid.expected_profit > sol.expected_profit + 1e-9) {
      std::ostringstream d;
      d << "incomplete-info profit " << sol.expected_profit << " vs grid oracle " << grid.expected_profit
        << " (N=" << users << " K=" << costs[0] << ',' << costs[1] << " theta=" << theta[0] << ',' << theta[1]
        << " t=" << sol.contract.items[0].task << ',' << sol.contract.items[1].task << " grid t="
        << grid.contract.items[0].task << ',' << grid.contract.items[1].task << ")";
      rep.mismatches.push_back({k, s, d.str()});
    }
  }
  return rep;
}

/// pmf normalization, tail complement, composition counts, multinomial
/// marginals, and marginal vs multinomial expected profit (I = 3).
inline Report probability(std::uint64_t seed, std::size_t instances, int max_users = 15) {
  Report rep("prob");
  for (std::size_t k = 0; k < instances; ++k) {
    const std::uint64_t s = derive_seed(seed, k);
    RngHandle rng(s);
    auto fail = [&](const std::string& what) { rep.mismatches.push_back({k, s, what}); };
    ++rep.instances;

    const int trials = gen::uniform_int(rng, 0, 200);
    const double p = rng.uniform() < 0.1 ? static_cast<double>(gen::uniform_int(rng, 0, 1)) : rng.uniform();
    const BinomialSpec spec(trials, p);
    const auto pmf = binom_pmf_table(spec);
    long double total = 0.0L;
    for (double v : pmf) total += v;
    ++rep.checks;
    if (std::abs(static_cast<double>(total) - 1.0) > 1e-10) {
      fail("pmf sums to " + std::to_string(static_cast<double>(total)) + " for B(" + std::to_string(trials) + ", " +
           std::to_string(p) + ")");
    }
    const int t = gen::uniform_int(rng, 0, trials + 1);
    long double below = 0.0L;
    for (int j = 0; j < t; ++j) below += pmf[j];
    ++rep.checks;
    if (std::abs(binom_tail(spec, t) + static_cast<double>(below) - 1.0) > 1e-10) fail("tail + head != 1");

    const int n = gen::uniform_int(rng, 0, 30);
    const int parts = gen::uniform_int(rng, 1, 5);
    std::uint64_t count = 0;
    for (const auto& c : multinomial_compositions(n, parts)) {
      (void)c;
      ++count;
    }
    ++rep.checks;
    if (count != composition_count(n, parts)) fail("composition count mismatch");

    const int users = gen::uniform_int(rng, 0, max_users);
    const auto q = gen::simplex(rng, 3);
    std::vector<std::vector<long double>> marg(3, std::vector<long double>(users + 1, 0.0L));
    for (const auto& c : multinomial_compositions(users, 3)) {
      const double w = std::exp(multinomial_log_pmf(c, q));
      for (std::size_t i = 0; i < 3; ++i) marg[i][c[i]] += w;
    }
    ++rep.checks;
    for (std::size_t i = 0; i < 3; ++i) {
      for (int j = 0; j <= users; ++j) {
        if (std::abs(static_cast<double>(marg[i][j]) - binom_pmf(BinomialSpec(users, q[i]), j)) > 1e-10) {
          fail("multinomial marginal differs from binomial pmf");
          i = 3;
          break;
        }
      }
    }

    const auto costs = gen::decreasing_costs(rng, 3, 0.25, 3.0, 0.25);
    std::vector<double> tasks{2.0 * rng.uniform(), 2.0 * rng.uniform(), 2.0 * rng.uniform()};
    std::sort(tasks.begin(), tasks.end());
    const std::vector<double> theta{0.5 + 5 * rng.uniform(), 0.5 + 5 * rng.uniform(), 0.5 + 5 * rng.uniform()};
    const UserTypeProfile prof(costs, {1e9, 1e9, 1e9}, theta, TypeDistribution{users, q});
    const auto c = contract_from_tasks(tasks, costs);
    const double a = expected_profit(c, prof, ExpectationMethod::marginal);
    const double b = expected_profit(c, prof, ExpectationMethod::multinomial);
    ++rep.checks;
    if (std::abs(a - b) > 1e-9) fail("marginal " + std::to_string(a) + " vs multinomial " + std::to_string(b));
  }
  return rep;
}

}  // namespace collab::verify
