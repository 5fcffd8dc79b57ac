#pragma once

// Brute-force ground truth: exhaustive profile enumeration, literal IR/IC
// evaluation, multinomial grid search and dense root scans. Expectations
// here use their own long-double direct summation, not prob_kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "collab/acquisition_game.hpp"
#include "collab/contract_design.hpp"
#include "collab/errors.hpp"

namespace collab::oracle {

inline constexpr int kMaxProfileUsers = 20;
inline constexpr std::size_t kMaxIrIcTypes = 12;
inline constexpr std::size_t kMaxGridTypes = 3;
inline constexpr int kMaxGridUsers = 15;
inline constexpr int kMaxGridResolution = 50;

using StrategyProfile = std::vector<bool>;

inline double collaborator_payoff(double reward, int collaborators, int required, double cost, PayoffModel model) {
  const bool ok = collaborators >= required;
  const double share = reward / collaborators;
  if (model == PayoffModel::A) return ok ? share - cost : 0.0;
  return (ok ? share : 0.0) - cost;
}

/// Every pure Nash equilibrium of the Stage II game with known costs.
/// A profile is stable when no collaborator gains by leaving (payoff 0) and
/// no other user gains by joining.
inline std::vector<StrategyProfile> enumerate_pure_ne(std::span<const double> costs, double reward, int required,
                                                      PayoffModel model) {
  const int n = static_cast<int>(costs.size());
  if (n > kMaxProfileUsers) {
    throw DomainError("enumerate_pure_ne: N = " + std::to_string(n) + " exceeds guard " + std::to_string(kMaxProfileUsers));
  }
  std::vector<StrategyProfile> out;
  const std::uint32_t total = 1u << n;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    const int k = __builtin_popcount(mask);
    bool stable = true;
    for (int i = 0; i < n && stable; ++i) {
      const bool in = (mask >> i) & 1u;
      if (in) {
        stable = collaborator_payoff(reward, k, required, costs[i], model) >= 0.0;
      } else {
        stable = collaborator_payoff(reward, k + 1, required, costs[i], model) <= 0.0;
      }
    }
    if (!stable) continue;
    StrategyProfile p(n);
    for (int i = 0; i < n; ++i) p[i] = (mask >> i) & 1u;
    out.push_back(std::move(p));
  }
  return out;
}

struct MasterOutcome {
  double reward = 0.0;
  double profit = 0.0;
  StrategyProfile profile;  // a successful equilibrium at `reward`, empty when reward is 0
};

/// Cheapest reward that admits a pure equilibrium with at least n0
/// collaborators, found by enumerating every candidate n * C_j. The master
/// pays it only if V covers it.
inline MasterOutcome complete_info_master(std::span<const double> costs, int required, double revenue, PayoffModel model) {
  const int n = static_cast<int>(costs.size());
  std::vector<double> candidates;
  for (int k = required; k <= n; ++k) {
    for (double c : costs) candidates.push_back(k * c);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  MasterOutcome out;
  for (double r : candidates) {
    if (r > revenue) break;
    for (const auto& p : enumerate_pure_ne(costs, r, required, model)) {
      if (std::count(p.begin(), p.end(), true) >= required) {
        out.reward = r;
        out.profit = revenue - r;
        out.profile = p;
        return out;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct IrIcViolation {
  std::size_t type_index;  // the user type deviating
  std::size_t item_index;  // item it prefers (== type_index for IR)
  bool individual_rationality;
  double gain;  // how much the constraint is violated by
};

/// All IR and IC constraints evaluated literally.
inline std::vector<IrIcViolation> enumerate_ir_ic(const Contract& c, std::span<const double> unit_cost, double tol = 1e-12) {
  const std::size_t n = unit_cost.size();
  if (n > kMaxIrIcTypes) throw DomainError("enumerate_ir_ic: I exceeds guard " + std::to_string(kMaxIrIcTypes));
  if (c.items.size() != n) throw DomainError("enumerate_ir_ic: contract and costs misaligned");
  std::vector<IrIcViolation> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double own = c.items[i].reward - unit_cost[i] * c.items[i].task;
    if (own < -tol) out.push_back({i, i, true, -own});
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double other = c.items[j].reward - unit_cost[i] * c.items[j].task;
      if (other > own + tol) out.push_back({i, j, false, other - own});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

/// Expected profit by enumerating every type composition, long double throughout.
inline long double multinomial_expected_profit(const Contract& c, const UserTypeProfile& profile) {
  const auto& d = profile.distribution();
  const std::size_t n = profile.types();
  const auto& theta = profile.preference();
  long double total = 0.0L;
  std::vector<int> counts(n, 0);
  const int users = d.users;

  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == n) {
      counts[i] = left;
      long double logw = std::lgamma(static_cast<long double>(users) + 1.0L);
      for (std::size_t k = 0; k < n; ++k) {
        if (counts[k] == 0) continue;
        if (d.probabilities[k] == 0.0) return;
        logw += counts[k] * std::log(static_cast<long double>(d.probabilities[k])) -
                std::lgamma(static_cast<long double>(counts[k]) + 1.0L);
      }
      long double value = 0.0L;
      for (std::size_t k = 0; k < n; ++k) {
        value += theta[k] * std::log1p(static_cast<long double>(counts[k]) * c.items[k].task) -
                 static_cast<long double>(counts[k]) * c.items[k].reward;
      }
      total += std::exp(logw) * value;
      return;
    }
    for (int k = 0; k <= left; ++k) {
      counts[i] = k;
      rec(i + 1, left - k);
    }
  };
  rec(0, users);
  return total;
}

struct GridContractResult {
  Contract contract;
  double expected_profit = 0.0;
  std::vector<double> upper;  // task range searched per type
};

/// Best contract over monotone task grids with cheapest feasible rewards,
/// scored by multinomial enumeration. Each refinement round re-centres a
/// grid of the same resolution on the incumbent with a quarter of the span.
inline GridContractResult grid_contract_oracle(const UserTypeProfile& profile, int resolution, int refinements = 0) {
  const std::size_t n = profile.types();
  const auto& d = profile.distribution();
  if (n > kMaxGridTypes) throw DomainError("grid_contract_oracle: I exceeds guard " + std::to_string(kMaxGridTypes));
  if (d.users > kMaxGridUsers) throw DomainError("grid_contract_oracle: N exceeds guard " + std::to_string(kMaxGridUsers));
  if (resolution < 2 || resolution > kMaxGridResolution) {
    throw DomainError("grid_contract_oracle: resolution must be in [2, " + std::to_string(kMaxGridResolution) + "]");
  }
  if (refinements < 0) throw DomainError("grid_contract_oracle: refinements must be >= 0");

  const auto& k = profile.unit_cost();
  const auto& theta = profile.preference();
  double reach = 0.0;
  for (std::size_t i = 0; i < n; ++i) reach = std::max(reach, theta[i] / k[i]);

  GridContractResult best;
  best.upper.resize(n);
  std::vector<double> lo(n, 0.0), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    hi[i] = std::min(profile.capacity()[i], reach);
    best.upper[i] = hi[i];
  }
  best.contract = Contract::null(n);
  best.expected_profit = static_cast<double>(multinomial_expected_profit(best.contract, profile));
  std::vector<double> best_tasks(n, 0.0);

  for (int round = 0; round <= refinements; ++round) {
    std::vector<int> idx(n, 0);
    while (true) {
      std::vector<double> t(n);
      bool monotone = true;
      for (std::size_t i = 0; i < n; ++i) {
        t[i] = lo[i] + (hi[i] - lo[i]) * idx[i] / (resolution - 1);
        if (i > 0 && t[i] < t[i - 1]) monotone = false;
      }
      if (monotone) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = i == 0 ? k[0] * t[0] : r[i - 1] + k[i] * (t[i] - t[i - 1]);
        Contract c = Contract::null(n);
        for (std::size_t i = 0; i < n; ++i) c.items[i] = {r[i], t[i]};
        const double v = static_cast<double>(multinomial_expected_profit(c, profile));
        if (v > best.expected_profit) {
          best.expected_profit = v;
          best.contract = c;
          best_tasks = t;
        }
      }
      std::size_t pos = 0;
      while (pos < n && ++idx[pos] == resolution) idx[pos++] = 0;
      if (pos == n) break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double span = (hi[i] - lo[i]) / 4.0;
      lo[i] = std::max(0.0, best_tasks[i] - span);
      hi[i] = std::min(best.upper[i], best_tasks[i] + span);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

struct SignChange {
  double lo;
  double hi;
};

/// Every grid interval [x_k, x_{k+1}] over which f strictly changes sign.
template <typename Fn>
std::vector<SignChange> dense_root_scan(Fn&& f, double lo, double hi, int points) {
  if (!(lo < hi)) throw DomainError("dense_root_scan: need lo < hi");
  if (points < 2) throw DomainError("dense_root_scan: need at least 2 points");
  std::vector<SignChange> out;
  double prev_x = lo;
  double prev = f(lo);
  if (!std::isfinite(prev)) throw NumericalError("dense_root_scan: f(" + std::to_string(lo) + ") is not finite");
  for (int k = 1; k < points; ++k) {
    const double x = k + 1 == points ? hi : lo + (hi - lo) * k / (points - 1);
    const double v = f(x);
    if (!std::isfinite(v)) throw NumericalError("dense_root_scan: f(" + std::to_string(x) + ") is not finite");
    if (prev * v < 0.0) out.push_back({prev_x, x});
    prev_x = x;
    prev = v;
  }
  return out;
}

struct GridMaximum {
  double x = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

/// Grid maximum of a 1-D function on [lo, hi]; each refinement zooms to
/// two grid steps around the incumbent.
template <typename Fn>
GridMaximum grid_maximize(Fn&& f, double lo, double hi, int points, int refinements = 0) {
  if (!(lo <= hi)) throw DomainError("grid_maximize: need lo <= hi");
  if (points < 2) throw DomainError("grid_maximize: need at least 2 points");
  GridMaximum best;
  const double a0 = lo, b0 = hi;
  for (int round = 0; round <= refinements; ++round) {
    const double step = (hi - lo) / (points - 1);
    for (int k = 0; k < points; ++k) {
      const double x = k + 1 == points ? hi : lo + step * k;
      const double v = f(x);
      if (v > best.value) best = {x, v};
    }
    lo = std::max(a0, best.x - 2.0 * step);
    hi = std::min(b0, best.x + 2.0 * step);
  }
  return best;
}

}  // namespace collab::oracle
