#pragma once

// Screening contracts for distributed computing.
//
// A type-i user has unit cost K_i (K_1 > ... > K_I, so higher index means a
// more efficient type), work capacity tbar_i, and the master values work
// from type i through theta_i * ln(1 + n_i t_i). A contract offers one
// (reward r_i, task t_i) item per type; a type-i user taking item j earns
// r_j - K_i t_j.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "collab/errors.hpp"
#include "collab/prob_kernels.hpp"

namespace collab {

/// Known number of users per type (complete information, or one realization).
struct KnownTypeCounts {
  std::vector<int> counts;
};

/// N users, each independently of type i with probability q_i.
struct TypeDistribution {
  int users = 0;
  std::vector<double> probabilities;
};

using TypePopulation = std::variant<KnownTypeCounts, TypeDistribution>;

class UserTypeProfile {
 public:
  UserTypeProfile(std::vector<double> unit_cost, std::vector<double> capacity, std::vector<double> preference,
                  TypePopulation population)
      : unit_cost_(std::move(unit_cost)),
        capacity_(std::move(capacity)),
        preference_(std::move(preference)),
        population_(std::move(population)) {
    const std::size_t n = unit_cost_.size();
    if (n == 0) throw DomainError("UserTypeProfile: need at least one type");
    if (capacity_.size() != n || preference_.size() != n) {
      throw DomainError("UserTypeProfile: K, t_bar and theta must have the same length");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(unit_cost_[i] > 0.0) || !std::isfinite(unit_cost_[i])) {
        throw DomainError("UserTypeProfile: K_" + std::to_string(i + 1) + " must be finite and > 0");
      }
      if (!(capacity_[i] > 0.0)) throw DomainError("UserTypeProfile: t_bar_" + std::to_string(i + 1) + " must be > 0");
      if (!(preference_[i] > 0.0) || !std::isfinite(preference_[i])) {
        throw DomainError("UserTypeProfile: theta_" + std::to_string(i + 1) + " must be finite and > 0");
      }
      if (i > 0 && unit_cost_[i] == unit_cost_[i - 1]) {
        throw DomainError("UserTypeProfile: types " + std::to_string(i) + " and " + std::to_string(i + 1) +
                          " share unit cost " + std::to_string(unit_cost_[i]) + "; merge them into a single type");
      }
      if (i > 0 && !(unit_cost_[i] < unit_cost_[i - 1])) {
        throw DomainError("UserTypeProfile: unit costs must be strictly decreasing (K_1 > ... > K_I)");
      }
    }
    if (const auto* c = std::get_if<KnownTypeCounts>(&population_)) {
      if (c->counts.size() != n) throw DomainError("UserTypeProfile: counts must have one entry per type");
      for (int v : c->counts) {
        if (v < 0) throw DomainError("UserTypeProfile: counts must be >= 0");
      }
    } else {
      const auto& d = std::get<TypeDistribution>(population_);
      if (d.users < 0) throw DomainError("UserTypeProfile: N must be >= 0");
      if (d.probabilities.size() != n) throw DomainError("UserTypeProfile: q must have one entry per type");
      validate_probabilities(d.probabilities, "UserTypeProfile");
    }
  }

  std::size_t types() const { return unit_cost_.size(); }
  const std::vector<double>& unit_cost() const { return unit_cost_; }
  const std::vector<double>& capacity() const { return capacity_; }
  const std::vector<double>& preference() const { return preference_; }
  const TypePopulation& population() const { return population_; }

  bool is_probabilistic() const { return std::holds_alternative<TypeDistribution>(population_); }

  const TypeDistribution& distribution() const {
    if (const auto* d = std::get_if<TypeDistribution>(&population_)) return *d;
    throw DomainError("UserTypeProfile: population is given as known counts, not (N, q)");
  }
  const std::vector<int>& counts() const {
    if (const auto* c = std::get_if<KnownTypeCounts>(&population_)) return c->counts;
    throw DomainError("UserTypeProfile: population is given as (N, q), not known counts");
  }

  /// Same types with the population replaced by known counts.
  UserTypeProfile with_counts(std::vector<int> counts) const {
    return UserTypeProfile(unit_cost_, capacity_, preference_, KnownTypeCounts{std::move(counts)});
  }

 private:
  std::vector<double> unit_cost_;
  std::vector<double> capacity_;
  std::vector<double> preference_;
  TypePopulation population_;
};

struct ContractItem {
  double reward = 0.0;
  double task = 0.0;
};

/// One item per type, aligned with the profile's type order.
struct Contract {
  std::vector<ContractItem> items;

  static Contract null(std::size_t types) { return Contract{std::vector<ContractItem>(types)}; }

  void validate() const {
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& it = items[i];
      if (!(it.reward >= 0.0) || !(it.task >= 0.0) || !std::isfinite(it.reward) || !std::isfinite(it.task)) {
        throw DomainError("Contract: item " + std::to_string(i + 1) + " needs finite reward >= 0 and task >= 0");
      }
    }
  }
};

inline std::vector<double> user_payoffs(const Contract& c, std::span<const double> unit_cost) {
  if (c.items.size() != unit_cost.size()) throw DomainError("user_payoffs: contract and profile are misaligned");
  std::vector<double> out(c.items.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c.items[i].reward - unit_cost[i] * c.items[i].task;
  return out;
}

// ---------------------------------------------------------------------------
// Feasibility
// ---------------------------------------------------------------------------

enum class FeasibilityCondition {
  participation,   // r_1 - K_1 t_1 >= 0
  monotone,        // 0 <= r_1 <= ... <= r_I and 0 <= t_1 <= ... <= t_I
  neighbor_bounds  // r_{i-1} + K_i dt <= r_i <= r_{i-1} + K_{i-1} dt
};

inline const char* to_string(FeasibilityCondition c) {
  switch (c) {
    case FeasibilityCondition::participation: return "participation(+)";
    case FeasibilityCondition::monotone: return "monotone(up)";
    case FeasibilityCondition::neighbor_bounds: return "neighbor_bounds(<=)";
  }
  return "?";
}

struct FeasibilityViolation {
  FeasibilityCondition condition;
  std::size_t type_index;  // 0-based index of the (upper) type involved
  std::string detail;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<FeasibilityViolation> violations;
};

/// Three-condition feasibility test, equivalent to all I^2 IR/IC constraints
/// when K is strictly decreasing. `tol` is an absolute slack on every inequality.
inline FeasibilityReport check_feasibility(const Contract& contract, std::span<const double> unit_cost, double tol = 1e-12) {
  const std::size_t n = unit_cost.size();
  if (contract.items.size() != n) {
    throw DomainError("check_feasibility: contract has " + std::to_string(contract.items.size()) + " items for " +
                      std::to_string(n) + " types");
  }
  FeasibilityReport rep;
  auto fail = [&](FeasibilityCondition c, std::size_t i, std::string d) {
    rep.feasible = false;
    rep.violations.push_back({c, i, std::move(d)});
  };
  const auto& it = contract.items;
  if (n == 0) return rep;

  if (it[0].reward - unit_cost[0] * it[0].task < -tol) {
    std::ostringstream d;
    d << "r_1 - K_1 t_1 = " << it[0].reward - unit_cost[0] * it[0].task << " < 0";
    fail(FeasibilityCondition::participation, 0, d.str());
  }
  if (it[0].reward < -tol || it[0].task < -tol) fail(FeasibilityCondition::monotone, 0, "r_1 or t_1 negative");
  for (std::size_t i = 1; i < n; ++i) {
    if (it[i].reward < it[i - 1].reward - tol) {
      fail(FeasibilityCondition::monotone, i, "r_" + std::to_string(i + 1) + " < r_" + std::to_string(i));
    }
    if (it[i].task < it[i - 1].task - tol) {
      fail(FeasibilityCondition::monotone, i, "t_" + std::to_string(i + 1) + " < t_" + std::to_string(i));
    }
    const double dt = it[i].task - it[i - 1].task;
    const double lower = it[i - 1].reward + unit_cost[i] * dt;
    const double upper = it[i - 1].reward + unit_cost[i - 1] * dt;
    if (it[i].reward < lower - tol || it[i].reward > upper + tol) {
      std::ostringstream d;
      d << "r_" << i + 1 << " = " << it[i].reward << " outside [" << lower << ", " << upper << "]";
      fail(FeasibilityCondition::neighbor_bounds, i, d.str());
    }
  }
  return rep;
}

/// Cheapest feasible rewards for nondecreasing tasks:
/// r_1 = K_1 t_1, r_i = r_{i-1} + K_i (t_i - t_{i-1}).
inline std::vector<double> optimal_rewards_given_tasks(std::span<const double> tasks, std::span<const double> unit_cost) {
  if (tasks.size() != unit_cost.size()) throw DomainError("optimal_rewards_given_tasks: size mismatch");
  std::vector<double> r(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!(tasks[i] >= 0.0)) throw DomainError("optimal_rewards_given_tasks: tasks must be >= 0");
    if (i > 0 && tasks[i] < tasks[i - 1]) {
      throw DomainError("optimal_rewards_given_tasks: tasks must be nondecreasing (t_" + std::to_string(i + 1) +
                        " < t_" + std::to_string(i) + ")");
    }
    r[i] = i == 0 ? unit_cost[0] * tasks[0] : r[i - 1] + unit_cost[i] * (tasks[i] - tasks[i - 1]);
  }
  return r;
}

inline Contract contract_from_tasks(std::span<const double> tasks, std::span<const double> unit_cost) {
  const auto r = optimal_rewards_given_tasks(tasks, unit_cost);
  Contract c = Contract::null(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) c.items[i] = {r[i], tasks[i]};
  return c;
}

// ---------------------------------------------------------------------------
// Profit evaluation
// ---------------------------------------------------------------------------

/// Master profit for one realization of type counts:
/// sum_i theta_i ln(1 + n_i t_i) - n_i r_i.
inline double realized_profit(const Contract& c, std::span<const int> counts, std::span<const double> theta) {
  if (c.items.size() != counts.size() || theta.size() != counts.size()) {
    throw DomainError("realized_profit: contract, counts and theta must align");
  }
  CompensatedSum acc;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    acc.add(theta[i] * std::log1p(counts[i] * c.items[i].task));
    acc.add(-counts[i] * c.items[i].reward);
  }
  return acc.value();
}

enum class ExpectationMethod { marginal, multinomial };

/// Largest population for the multinomial enumeration path.
inline constexpr int kMultinomialMaxUsers = 30;

/// Expected master profit when the N users' types are drawn i.i.d. from q.
/// `marginal` uses n_i ~ B(N, q_i) per type (the profit is separable across
/// types); `multinomial` enumerates every composition of N.
inline double expected_profit(const Contract& c, const UserTypeProfile& profile,
                              ExpectationMethod method = ExpectationMethod::marginal) {
  const auto& d = profile.distribution();
  const std::size_t n = profile.types();
  if (c.items.size() != n) throw DomainError("expected_profit: contract and profile are misaligned");
  const auto& theta = profile.preference();

  if (method == ExpectationMethod::marginal) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = c.items[i].task;
      const BinomialTable tab(BinomialSpec(d.users, d.probabilities[i]));
      acc.add(tab.expect([&](int k) { return theta[i] * std::log1p(k * t); }));
      acc.add(-d.users * d.probabilities[i] * c.items[i].reward);
    }
    return acc.value();
  }

  if (d.users > kMultinomialMaxUsers) {
    throw DomainError("expected_profit: multinomial enumeration limited to N <= " + std::to_string(kMultinomialMaxUsers));
  }
  std::vector<double> weights;
  std::vector<double> values;
  for (const auto& counts : multinomial_compositions(d.users, static_cast<int>(n))) {
    const double lw = multinomial_log_pmf(counts, d.probabilities);
    if (lw == -std::numeric_limits<double>::infinity()) continue;
    weights.push_back(std::exp(lw));
    values.push_back(realized_profit(c, counts, theta));
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weights[a] < weights[b]; });
  CompensatedSum acc;
  for (std::size_t k : order) acc.add(weights[k] * values[k]);
  return acc.value();
}

// ---------------------------------------------------------------------------
// Solutions
// ---------------------------------------------------------------------------

struct KktDiagnostics {
  std::vector<double> order_multipliers;        // lambda_i for t_i <= t_{i+1}, size I-1
  std::vector<double> capacity_multipliers;     // v_i for t_i <= tbar_i
  std::vector<double> nonnegativity_multipliers;  // for t_i >= 0
  std::vector<double> gradient;                 // d E[profit] / d t_i at the solution
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::vector<std::vector<std::size_t>> pools;  // groups of >= 2 types forced to one task
  std::vector<std::size_t> threshold_involved;  // types whose marginal gain at t = 0 is positive
  bool used_fallback = false;
};

struct ContractSolution {
  Contract contract;
  std::vector<std::size_t> involved;  // types with a positive task
  double expected_profit = 0.0;
  std::vector<double> payoffs;  // r_i - K_i t_i
  KktDiagnostics kkt;
};

/// Types the master hires under complete information: theta_i > K_i.
inline std::vector<std::size_t> complete_info_involved(const UserTypeProfile& p) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.types(); ++i) {
    if (p.preference()[i] > p.unit_cost()[i]) out.push_back(i);
  }
  return out;
}

/// Complete information: each type is priced at cost (zero payoff) with
/// t_i = min((theta_i - K_i) / (K_i N_i), tbar_i) when theta_i > K_i and N_i > 0.
inline ContractSolution solve_complete(const UserTypeProfile& profile) {
  const auto& counts = profile.counts();
  const auto& k = profile.unit_cost();
  const auto& theta = profile.preference();
  const auto& cap = profile.capacity();
  ContractSolution sol;
  sol.contract = Contract::null(profile.types());
  for (std::size_t i = 0; i < profile.types(); ++i) {
    if (theta[i] <= k[i] || counts[i] == 0) continue;
    const double t = std::min((theta[i] - k[i]) / (k[i] * counts[i]), cap[i]);
    sol.contract.items[i] = {k[i] * t, t};
    sol.involved.push_back(i);
  }
  sol.expected_profit = realized_profit(sol.contract, counts, theta);
  sol.payoffs = user_payoffs(sol.contract, k);
  return sol;
}

/// Sum_i n_i (r_i - K_i t_i) for one realization of type counts.
inline double aggregate_user_payoff(const ContractSolution& sol, std::span<const double> unit_cost, std::span<const int> counts) {
  const auto u = user_payoffs(sol.contract, unit_cost);
  if (counts.size() != u.size()) throw DomainError("aggregate_user_payoff: counts misaligned");
  CompensatedSum acc;
  for (std::size_t i = 0; i < u.size(); ++i) acc.add(counts[i] * u[i]);
  return acc.value();
}

// ---------------------------------------------------------------------------
// Asymmetrically incomplete information
// ---------------------------------------------------------------------------

namespace detail {

// Separable concave objective sum_i h_i(t_i) over 0 <= t_1 <= ... <= t_I,
// t_i <= ub_i, solved by pool-adjacent-violators. `deriv(i, t)` is h_i'(t),
// nonincreasing in t.
struct PoolBlock {
  std::size_t first;
  std::size_t last;
  double value;
};

template <typename Deriv>
double solve_block(const Deriv& deriv, std::span<const double> upper, std::size_t first, std::size_t last) {
  auto total = [&](double t) {
    CompensatedSum acc;
    for (std::size_t i = first; i <= last; ++i) acc.add(deriv(i, t));
    return acc.value();
  };
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = first; i <= last; ++i) bound = std::min(bound, upper[i]);
  if (total(0.0) <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi < bound && total(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NumericalError("solve_incomplete: objective increases without bound");
  }
  if (hi >= bound) {
    hi = bound;
    if (total(hi) >= 0.0) return hi;
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (total(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

template <typename Deriv>
std::vector<PoolBlock> pool_adjacent_violators(const Deriv& deriv, std::span<const double> upper) {
  std::vector<PoolBlock> blocks;
  for (std::size_t i = 0; i < upper.size(); ++i) {
    blocks.push_back({i, i, solve_block(deriv, upper, i, i)});
    while (blocks.size() >= 2 && blocks[blocks.size() - 2].value > blocks.back().value) {
      const PoolBlock merged{blocks[blocks.size() - 2].first, blocks.back().last, 0.0};
      blocks.pop_back();
      blocks.back() = merged;
      blocks.back().value = solve_block(deriv, upper, merged.first, merged.last);
    }
  }
  return blocks;
}

// Maximal runs of equal consecutive tasks.
inline std::vector<PoolBlock> blocks_from_tasks(std::span<const double> t, double eps) {
  std::vector<PoolBlock> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!out.empty() && std::abs(t[i] - out.back().value) <= eps) {
      out.back().last = i;
    } else {
      out.push_back({i, i, t[i]});
    }
  }
  return out;
}

}  // namespace detail

struct IncompleteSolverOptions {
  double kkt_tolerance = 1e-8;  // scaled by max(1, largest marginal cost coefficient)
  int fallback_iterations = 20000;
  bool force_projected_gradient = false;  // skip pooling; exercise the fallback path
};

/// Marginal expected profit of raising t_i, with n_i ~ B(N, q_i):
///   E[n_i theta_i / (1 + n_i t_i)] - N q_i K_i - (K_i - K_{i+1}) N sum_{j>i} q_j
/// (the last term is absent for the highest type). Depends on t_i only.
class IncompleteInfoGradient {
 public:
  explicit IncompleteInfoGradient(const UserTypeProfile& profile) : theta_(profile.preference()) {
    const auto& d = profile.distribution();
    const auto& k = profile.unit_cost();
    const std::size_t n = profile.types();
    const double users = d.users;
    coeff_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      tables_.emplace_back(BinomialSpec(d.users, d.probabilities[i]));
      CompensatedSum higher;
      for (std::size_t j = i + 1; j < n; ++j) higher.add(d.probabilities[j]);
      coeff_[i] = users * d.probabilities[i] * k[i] + (i + 1 < n ? (k[i] - k[i + 1]) * users * higher.value() : 0.0);
    }
  }

  double operator()(std::size_t i, double t) const {
    const double th = theta_[i];
    return tables_[i].expect([&](int m) { return m * th / (1.0 + m * t); }) - coeff_[i];
  }

  /// Marginal cost coefficient of t_i (reward outlay per unit task).
  double coefficient(std::size_t i) const { return coeff_[i]; }
  std::size_t size() const { return coeff_.size(); }

 private:
  std::vector<double> theta_;
  std::vector<double> coeff_;
  std::vector<BinomialTable> tables_;
};

/// Types with positive marginal expected profit at t_i = 0:
/// N q_i (theta_i - K_i) - (K_i - K_{i+1}) N sum_{j>i} q_j > 0.
inline std::vector<std::size_t> incomplete_info_involved(const UserTypeProfile& profile) {
  const IncompleteInfoGradient grad(profile);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (grad(i, 0.0) > 0.0) out.push_back(i);
  }
  return out;
}

namespace detail {

// Multipliers and the worst KKT residual for tasks `t` grouped into `blocks`.
inline void fill_kkt(KktDiagnostics& kkt, const IncompleteInfoGradient& grad, std::span<const double> t,
                     std::span<const double> cap, const std::vector<PoolBlock>& blocks) {
  const std::size_t n = t.size();
  kkt.gradient.assign(n, 0.0);
  kkt.order_multipliers.assign(n > 0 ? n - 1 : 0, 0.0);
  kkt.capacity_multipliers.assign(n, 0.0);
  kkt.nonnegativity_multipliers.assign(n, 0.0);
  kkt.pools.clear();
  for (std::size_t i = 0; i < n; ++i) kkt.gradient[i] = grad(i, t[i]);

  double worst = 0.0;
  auto note = [&](double r) { worst = std::max(worst, r); };
  for (std::size_t i = 0; i < n; ++i) {
    note(std::max(0.0, -t[i]));
    note(std::max(0.0, t[i] - cap[i]));
    if (i + 1 < n) note(std::max(0.0, t[i] - t[i + 1]));
  }

  for (const auto& b : blocks) {
    if (b.last > b.first) {
      std::vector<std::size_t> members;
      for (std::size_t i = b.first; i <= b.last; ++i) members.push_back(i);
      kkt.pools.push_back(std::move(members));
    }
    CompensatedSum block_sum;
    for (std::size_t i = b.first; i <= b.last; ++i) block_sum.add(kkt.gradient[i]);
    const double total = block_sum.value();

    double bound = std::numeric_limits<double>::infinity();
    std::size_t bound_at = b.last;
    for (std::size_t i = b.first; i <= b.last; ++i) {
      if (cap[i] <= bound) {
        bound = cap[i];
        bound_at = i;
      }
    }
    const bool at_zero = b.value <= 0.0;
    const bool at_cap = !at_zero && b.value >= bound;
    if (at_zero) {
      kkt.nonnegativity_multipliers[b.first] = -total;
      note(std::max(0.0, total));
    } else if (at_cap) {
      kkt.capacity_multipliers[bound_at] = total;
      note(std::max(0.0, -total));
    } else {
      note(std::abs(total));
    }
    // lambda_i = lambda_{i-1} + g_i - v_i + w_i, entering each block at zero.
    double lambda = 0.0;
    for (std::size_t i = b.first; i < b.last; ++i) {
      lambda += kkt.gradient[i] - kkt.capacity_multipliers[i] + kkt.nonnegativity_multipliers[i];
      kkt.order_multipliers[i] = lambda;
      note(std::max(0.0, -lambda));
    }
  }
  kkt.max_residual = worst;
}

}  // namespace detail

/// Asymmetrically incomplete information: maximize expected profit over
/// nondecreasing tasks with rewards fixed by optimal_rewards_given_tasks.
/// The objective separates per type, so the chain-constrained problem is
/// solved by pooling adjacent violators (each pool is one monotone 1-D root
/// find on the summed marginal profit, clamped to [0, min capacity]). The
/// result is checked against the KKT conditions; if the check fails a
/// projected-gradient refinement runs before giving up.
inline ContractSolution solve_incomplete(const UserTypeProfile& profile, const IncompleteSolverOptions& opts = {}) {
  const auto& d = profile.distribution();
  (void)d;
  const std::size_t n = profile.types();
  const auto& cap = profile.capacity();
  const auto& k = profile.unit_cost();
  const IncompleteInfoGradient grad(profile);

  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(grad.coefficient(i)));
  const double tol = opts.kkt_tolerance * scale;

  std::vector<double> tasks(n, 0.0);
  std::vector<detail::PoolBlock> blocks;
  KktDiagnostics kkt;
  kkt.tolerance = tol;

  if (!opts.force_projected_gradient) {
    blocks = detail::pool_adjacent_violators(grad, cap);
    for (const auto& b : blocks) {
      for (std::size_t i = b.first; i <= b.last; ++i) tasks[i] = b.value;
    }
    detail::fill_kkt(kkt, grad, tasks, cap, blocks);
  }

  if (opts.force_projected_gradient || kkt.max_residual > tol) {
    // Projected gradient ascent; projection onto {0 <= t nondecreasing <= cap}
    // is itself a pooling problem with derivative (y_i - t).
    kkt.used_fallback = true;
    std::vector<double> t = tasks;
    double step = 1.0 / std::max(1.0, scale);
    for (int it = 0; it < opts.fallback_iterations; ++it) {
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) y[i] = t[i] + step * grad(i, t[i]);
      auto proj = detail::pool_adjacent_violators([&](std::size_t i, double x) { return y[i] - x; }, cap);
      std::vector<double> next(n);
      for (const auto& b : proj) {
        for (std::size_t i = b.first; i <= b.last; ++i) next[i] = b.value;
      }
      double moved = 0.0;
      for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(next[i] - t[i]));
      t = std::move(next);
      if (moved < 1e-15) break;
      if (it % 1000 == 999) step *= 0.5;
    }
    tasks = t;
    // Snap near-equal neighbours and near-bound values before checking KKT.
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(tasks[i]) < 1e-12) tasks[i] = 0.0;
      if (std::abs(tasks[i] - cap[i]) < 1e-12) tasks[i] = cap[i];
      if (i > 0 && std::abs(tasks[i] - tasks[i - 1]) < 1e-12) tasks[i] = tasks[i - 1];
    }
    blocks = detail::blocks_from_tasks(tasks, 0.0);
    detail::fill_kkt(kkt, grad, tasks, cap, blocks);
    if (kkt.max_residual > tol) {
      std::ostringstream msg;
      msg << "solve_incomplete: KKT residual " << kkt.max_residual << " exceeds tolerance " << tol << "; tasks =";
      for (double x : tasks) msg << ' ' << x;
      msg << "; gradient =";
      for (double g : kkt.gradient) msg << ' ' << g;
      throw NumericalError(msg.str());
    }
  }

  kkt.threshold_involved = incomplete_info_involved(profile);

  ContractSolution sol;
  sol.contract = contract_from_tasks(tasks, k);
  for (std::size_t i = 0; i < n; ++i) {
    if (tasks[i] > 0.0) sol.involved.push_back(i);
  }
  sol.expected_profit = expected_profit(sol.contract, profile, ExpectationMethod::marginal);
  sol.payoffs = user_payoffs(sol.contract, k);
  sol.kkt = std::move(kkt);
  return sol;
}

}  // namespace collab
