#pragma once

// Two-stage reward game for data acquisition. The master announces a total
// reward R (Stage I); users decide whether to collaborate (Stage II); the
// master earns V only when at least n0 users collaborate.
//
// Payoff models for a collaborator i when n users collaborate:
//   A:  (R/n - C_i) * 1{n >= n0}     cost paid only on success
//   B:  (R/n) * 1{n >= n0} - C_i     cost always paid

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <utility>
#include <vector>

#include "collab/cost_models.hpp"
#include "collab/errors.hpp"
#include "collab/prob_kernels.hpp"

namespace collab {

enum class PayoffModel { A, B };

inline const char* to_string(PayoffModel m) { return m == PayoffModel::A ? "A" : "B"; }

/// Everyone knows every user's cost.
struct CompleteInfo {
  KnownCosts costs;
};
/// Nobody (not even the user) knows individual costs; F is common knowledge.
struct SymmetricInfo {
  CostModel costs;
};
/// Each user knows their own cost; the master knows only F.
struct AsymmetricInfo {
  CostModel costs;
};

using InformationScenario = std::variant<CompleteInfo, SymmetricInfo, AsymmetricInfo>;

struct AcquisitionScenario {
  int users = 0;         // N
  int required = 1;      // n0, collaborator threshold
  double revenue = 0.0;  // V
  PayoffModel model = PayoffModel::A;
  InformationScenario info = SymmetricInfo{CostModel::uniform(1.0)};

  void validate() const {
    if (required < 1) throw DomainError("scenario: threshold n0 must be >= 1");
    if (users <= required) throw DomainError("scenario: need n0 < N");
    if (!(revenue >= 0.0) || !std::isfinite(revenue)) throw DomainError("scenario: revenue V must be finite and >= 0");
    if (const auto* c = std::get_if<CompleteInfo>(&info)) {
      if (c->costs.size() != static_cast<std::size_t>(users)) {
        throw DomainError("scenario: complete information needs exactly N known costs");
      }
    }
  }

  /// F(.) for the incomplete-information scenarios.
  const CostModel& cost_model() const {
    if (const auto* s = std::get_if<SymmetricInfo>(&info)) return s->costs;
    if (const auto* a = std::get_if<AsymmetricInfo>(&info)) return a->costs;
    throw DomainError("scenario: complete information carries no cost distribution");
  }

  bool is_complete() const { return std::holds_alternative<CompleteInfo>(info); }
  bool is_symmetric() const { return std::holds_alternative<SymmetricInfo>(info); }
  bool is_asymmetric() const { return std::holds_alternative<AsymmetricInfo>(info); }
};

// Stage II outcomes.
struct PureProfile {
  std::vector<std::size_t> collaborators;  // ascending user indices
};
struct MixedProfile {
  double probability = 0.0;
};
struct ThresholdProfile {
  double gamma = 0.0;  // collaborate iff C_i <= gamma
};
using StageTwoOutcome = std::variant<PureProfile, MixedProfile, ThresholdProfile>;

struct AcquisitionEquilibrium {
  double reward = 0.0;  // R*
  StageTwoOutcome stage2 = PureProfile{};
  double success_prob = 0.0;
  double master_profit = 0.0;  // expected
  std::vector<double> user_payoffs;  // per user when individually determined
  double expected_collaborators = 0.0;
  std::vector<std::string> diagnostics;
};

/// V-bar equally spaced reward values over [0, V], first 0 and last V.
struct RewardGrid {
  std::size_t points = 1001;

  explicit RewardGrid(std::size_t n = 1001) : points(n) {
    if (n < 2) throw DomainError("RewardGrid: need at least 2 points");
  }
  double at(std::size_t k, double revenue) const {
    if (k + 1 == points) return revenue;
    return revenue * static_cast<double>(k) / static_cast<double>(points - 1);
  }
};

// ---------------------------------------------------------------------------
// Complete information
// ---------------------------------------------------------------------------

/// Offer R* = n0 * C_(n0) to the n0 cheapest users when V covers it, else R* = 0.
/// Equal costs are ordered by user index.
inline AcquisitionEquilibrium solve_complete(const AcquisitionScenario& s) {
  s.validate();
  const auto* info = std::get_if<CompleteInfo>(&s.info);
  if (info == nullptr) throw DomainError("solve_complete: scenario is not complete information");
  const auto& costs = info->costs;
  const std::size_t n = costs.size();
  const std::size_t n0 = static_cast<std::size_t>(s.required);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });

  AcquisitionEquilibrium eq;
  eq.user_payoffs.assign(n, 0.0);

  const double pivot = costs[order[n0 - 1]];
  for (std::size_t k = 1; k < n; ++k) {
    if (costs[order[k]] == costs[order[k - 1]]) {
      eq.diagnostics.push_back("duplicate costs present; ties broken by user index (multiple equilibria exist)");
      break;
    }
  }
  if (n0 < n && costs[order[n0]] == pivot) {
    eq.diagnostics.push_back("tie at the n0-th cost; collaborator set depends on the index tie-break");
  }

  const double threshold_reward = static_cast<double>(n0) * pivot;
  if (s.revenue < threshold_reward) {
    eq.stage2 = PureProfile{};
    return eq;
  }

  PureProfile chosen;
  chosen.collaborators.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n0));
  std::sort(chosen.collaborators.begin(), chosen.collaborators.end());
  for (std::size_t i : chosen.collaborators) eq.user_payoffs[i] = pivot - costs[i];

  eq.reward = threshold_reward;
  eq.stage2 = std::move(chosen);
  eq.success_prob = 1.0;
  eq.master_profit = s.revenue - threshold_reward;
  eq.expected_collaborators = static_cast<double>(n0);
  return eq;
}

// ---------------------------------------------------------------------------
// Symmetrically incomplete information
// ---------------------------------------------------------------------------

namespace detail {

inline double positive_mean(const AcquisitionScenario& s) {
  const double mu = s.cost_model().mean();
  if (!(mu > 0.0)) throw DomainError("symmetric information needs a positive mean cost");
  return mu;
}

}  // namespace detail

/// Pure-strategy collaborator count n* for a given reward: 0 below n0*mu,
/// floor(R/mu) on [n0*mu, N*mu), N beyond.
inline int symmetric_pure_count(const AcquisitionScenario& s, double reward) {
  s.validate();
  const double mu = detail::positive_mean(s);
  if (reward < s.required * mu) return 0;
  if (reward >= s.users * mu) return s.users;
  int n = static_cast<int>(std::floor(reward / mu));
  while ((n + 1) * mu <= reward) ++n;
  while (n > 0 && n * mu > reward) --n;
  return n;
}

inline AcquisitionEquilibrium solve_symmetric_pure(const AcquisitionScenario& s) {
  s.validate();
  if (!s.is_symmetric()) throw DomainError("solve_symmetric_pure: scenario is not symmetric information");
  const double mu = detail::positive_mean(s);
  const double threshold_reward = static_cast<double>(s.required) * mu;

  AcquisitionEquilibrium eq;
  eq.user_payoffs.assign(static_cast<std::size_t>(s.users), 0.0);
  if (s.revenue < threshold_reward) {
    eq.stage2 = PureProfile{};
    return eq;
  }
  PureProfile chosen;
  for (int i = 0; i < s.required; ++i) chosen.collaborators.push_back(static_cast<std::size_t>(i));
  for (std::size_t i : chosen.collaborators) eq.user_payoffs[i] = threshold_reward / s.required - mu;

  eq.reward = threshold_reward;
  eq.stage2 = std::move(chosen);
  eq.success_prob = 1.0;
  eq.master_profit = s.revenue - threshold_reward;
  eq.expected_collaborators = static_cast<double>(s.required);
  return eq;
}

/// Expected payoff u(R, p) of collaborating when every other user
/// collaborates with probability p (m ~ B(N-1, p) others).
inline double mixed_indifference(const AcquisitionScenario& s, double reward, double p) {
  const double mu = detail::positive_mean(s);
  const BinomialSpec others(s.users - 1, p);
  const int n0 = s.required;
  if (s.model == PayoffModel::A) {
    return binom_expect(others, [&](int m) { return m + 1 >= n0 ? reward / (m + 1) - mu : 0.0; });
  }
  return binom_expect(others, [&](int m) { return m + 1 >= n0 ? reward / (m + 1) : 0.0; }) - mu;
}

namespace detail {

// Bisection on a bracket where f(lo) is on the nonnegative side and f(hi) < 0.
// Runs until the interval cannot shrink further or the iteration cap is hit.
template <typename Fn>
double bisect_decreasing(Fn&& f, double lo, double hi, int max_iter = 200) {
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

template <typename Fn>
double bisect_increasing(Fn&& f, double lo, double hi, int max_iter = 200) {
  return bisect_decreasing([&](double x) { return -f(x); }, lo, hi, max_iter);
}

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace detail

/// Symmetric mixed-strategy probability p* solving u(R, p*) = 0, or nullopt
/// when no interior solution exists. Model A admits one only for
/// n0*mu < R < N*mu; a second sign change there is reported as an error.
/// Model B returns the largest interior root.
inline std::optional<double> solve_symmetric_mixed(const AcquisitionScenario& s, double reward) {
  s.validate();
  if (!s.is_symmetric()) throw DomainError("solve_symmetric_mixed: scenario is not symmetric information");
  const double mu = detail::positive_mean(s);
  if (s.model == PayoffModel::A && (reward <= s.required * mu || reward >= s.users * mu)) return std::nullopt;

  constexpr int kScan = 1024;
  std::vector<double> xs;
  std::vector<int> signs;
  xs.reserve(kScan + 2);
  signs.reserve(kScan + 2);
  auto u = [&](double p) { return mixed_indifference(s, reward, p); };

  // Endpoint signs: for model A on the open range they are + at 0 and - at 1
  // (lowest / highest order terms), even where u underflows to 0.
  xs.push_back(0.0);
  signs.push_back(s.model == PayoffModel::A ? 1 : detail::sign_of(u(0.0)));
  for (int k = 1; k <= kScan; ++k) {
    const double p = static_cast<double>(k) / (kScan + 1);
    xs.push_back(p);
    signs.push_back(detail::sign_of(u(p)));
  }
  xs.push_back(1.0);
  signs.push_back(s.model == PayoffModel::A ? -1 : detail::sign_of(u(1.0)));

  struct Bracket {
    double lo, hi;
    int lo_sign;
  };
  std::vector<Bracket> brackets;
  std::size_t prev = xs.size();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (signs[k] == 0) continue;
    if (prev != xs.size() && signs[prev] != signs[k]) brackets.push_back({xs[prev], xs[k], signs[prev]});
    prev = k;
  }
  if (brackets.empty()) return std::nullopt;
  if (s.model == PayoffModel::A && brackets.size() > 1) {
    std::ostringstream msg;
    msg << "solve_symmetric_mixed: " << brackets.size() << " sign changes of u(R,p) for R=" << reward << ":";
    for (const auto& b : brackets) msg << " [" << b.lo << "," << b.hi << "]";
    throw NumericalError(msg.str());
  }
  const Bracket b = brackets.back();
  // Keep zeros on the side of the bracket's left sign (handles underflow near p=0).
  const double p = b.lo_sign > 0
                       ? detail::bisect_decreasing([&](double x) { return u(x) < 0.0 ? -1.0 : 1.0; }, b.lo, b.hi)
                       : detail::bisect_increasing([&](double x) { return u(x) > 0.0 ? 1.0 : -1.0; }, b.lo, b.hi);
  return p;
}

// ---------------------------------------------------------------------------
// Asymmetrically incomplete information
// ---------------------------------------------------------------------------

/// Indifference gap at a common threshold gamma, with m ~ B(N-1, F(gamma)):
///   A:  Phi(gamma) = E[(R/(m+1) - gamma) 1{m+1 >= n0}]
///   B:  Psi(gamma) = E[R/(m+1) 1{m+1 >= n0}] - gamma
inline double threshold_gap(const AcquisitionScenario& s, double reward, double gamma) {
  const BinomialSpec others(s.users - 1, s.cost_model().cdf(gamma));
  const int n0 = s.required;
  if (s.model == PayoffModel::A) {
    return binom_expect(others, [&](int m) { return m + 1 >= n0 ? reward / (m + 1) - gamma : 0.0; });
  }
  return binom_expect(others, [&](int m) { return m + 1 >= n0 ? reward / (m + 1) : 0.0; }) - gamma;
}

namespace detail {

// Phi(gamma) divided by the largest pmf term with m + 1 >= n0 (same sign as
// Phi). Keeps the sign readable when the success mass underflows.
inline double scaled_phi(const AcquisitionScenario& s, double reward, double gamma) {
  const int n = s.users - 1;
  const int first = std::max(0, s.required - 1);
  const double p = s.cost_model().cdf(gamma);
  if (p == 0.0) return first == 0 ? reward - gamma : 0.0;
  if (p == 1.0) return reward / s.users - gamma;
  std::vector<double> logw;
  logw.reserve(static_cast<std::size_t>(n - first + 1));
  for (int m = first; m <= n; ++m) logw.push_back(log_choose(n, m) + m * std::log(p) + (n - m) * std::log1p(-p));
  const double top = *std::max_element(logw.begin(), logw.end());
  std::vector<std::pair<double, double>> terms;
  for (int m = first; m <= n; ++m) {
    const double w = std::exp(logw[static_cast<std::size_t>(m - first)] - top);
    terms.emplace_back(w, w * (reward / (m + 1) - gamma));
  }
  std::sort(terms.begin(), terms.end());
  CompensatedSum acc;
  for (const auto& t : terms) acc.add(t.second);
  return acc.value();
}

}  // namespace detail

/// Equilibrium decision threshold gamma*(R).
///
/// Model A: the unique root of Phi on (R/N, R/n0), by bisection. For cost
/// distributions with atoms Phi can jump, and the returned value is the
/// supremum of {gamma : Phi(gamma) > 0} inside the bracket (R/N if empty).
/// Model B: the largest root of Psi located on a 4096-point grid over
/// (0, R/n0]; nullopt when Psi has no root (reward too small).
inline std::optional<double> solve_asymmetric_threshold(const AcquisitionScenario& s, double reward) {
  s.validate();
  if (!s.is_asymmetric()) throw DomainError("solve_asymmetric_threshold: scenario is not asymmetric information");
  if (!(reward >= 0.0) || !std::isfinite(reward)) throw DomainError("solve_asymmetric_threshold: reward must be >= 0");
  if (reward == 0.0) return 0.0;

  auto gap = [&](double g) { return threshold_gap(s, reward, g); };

  if (s.model == PayoffModel::A) {
    const double lo = reward / s.users;
    const double hi = reward / s.required;
    // Phi(R/N) >= 0 and Phi(R/n0) < 0 whenever someone can afford R/n0.
    if (s.cost_model().cdf(hi) == 0.0) return hi;
    if (!s.cost_model().has_atoms()) {
      const double left = detail::scaled_phi(s, reward, lo);
      const double right = detail::scaled_phi(s, reward, hi);
      if (left < 0.0 || !(right < 0.0)) {
        std::ostringstream msg;
        msg << "solve_asymmetric_threshold: bracket sign check failed for R=" << reward << ": Phi(" << lo
            << ") ~ " << left << ", Phi(" << hi << ") ~ " << right;
        throw NumericalError(msg.str());
      }
    }
    return detail::bisect_decreasing([&](double g) { return detail::scaled_phi(s, reward, g) > 0.0 ? 1.0 : -1.0; }, lo,
                                     hi);
  }

  constexpr int kGrid = 4096;
  const double hi = reward / s.required;
  // Psi(g) <= (R/n0) P(m+1 >= n0 | F(g_k)) - g for g <= g_k, so points above
  // that bound are skipped.
  for (int k = kGrid; k >= 1;) {
    const double g = hi * k / kGrid;
    const double v = gap(g);
    if (v > 0.0) {
      if (k == kGrid) return hi;
      return detail::bisect_decreasing([&](double x) { return gap(x) > 0.0 ? 1.0 : -1.0; }, g, hi * (k + 1) / kGrid);
    }
    if (v == 0.0) return g;
    const double tail = binom_tail(BinomialSpec(s.users - 1, s.cost_model().cdf(g)), s.required - 1);
    k = std::min(k - 1, static_cast<int>(std::floor(tail * kGrid)) + 1);
  }
  return std::nullopt;
}

/// P(n >= n0) when users follow the threshold equilibrium for `reward`.
inline double asymmetric_success_probability(const AcquisitionScenario& s, double reward) {
  const auto gamma = solve_asymmetric_threshold(s, reward);
  if (!gamma) return 0.0;
  return binom_tail(BinomialSpec(s.users, s.cost_model().cdf(*gamma)), s.required);
}

/// f(R) = (V - R) P(n >= n0), n ~ B(N, F(gamma*(R))).
inline double asymmetric_expected_profit(const AcquisitionScenario& s, double reward) {
  return (s.revenue - reward) * asymmetric_success_probability(s, reward);
}

/// N * F(gamma*(R)), the mean number of collaborators at the threshold equilibrium.
inline double expected_collaborators(const AcquisitionScenario& s, double reward) {
  const auto gamma = solve_asymmetric_threshold(s, reward);
  if (!gamma) return 0.0;
  return s.users * s.cost_model().cdf(*gamma);
}

/// Stage I under asymmetric information: maximize f(R) over the reward grid.
/// Ties go to the smaller reward.
inline AcquisitionEquilibrium optimize_reward_asymmetric(const AcquisitionScenario& s, const RewardGrid& grid = RewardGrid{}) {
  s.validate();
  if (!s.is_asymmetric()) throw DomainError("optimize_reward_asymmetric: scenario is not asymmetric information");

  double best_reward = 0.0;
  double best_profit = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.points; ++k) {
    const double r = grid.at(k, s.revenue);
    const double f = asymmetric_expected_profit(s, r);
    if (f > best_profit) {
      best_profit = f;
      best_reward = r;
    }
  }
  if (best_profit <= 0.0) {
    best_reward = 0.0;
    best_profit = 0.0;
  }

  AcquisitionEquilibrium eq;
  eq.reward = best_reward;
  const auto gamma = solve_asymmetric_threshold(s, best_reward);
  if (gamma) {
    eq.stage2 = ThresholdProfile{*gamma};
    const double f = s.cost_model().cdf(*gamma);
    eq.success_prob = binom_tail(BinomialSpec(s.users, f), s.required);
    eq.expected_collaborators = s.users * f;
  } else {
    eq.stage2 = PureProfile{};
    eq.diagnostics.push_back("no equilibrium threshold at the chosen reward; nobody collaborates");
  }
  eq.master_profit = best_profit;
  return eq;
}

// ---------------------------------------------------------------------------
// Inspection helpers
// ---------------------------------------------------------------------------

struct MixedProfitPoint {
  double reward = 0.0;
  double probability = 0.0;  // p*(R)
  double success_prob = 0.0;
  double profit = 0.0;  // f(R)
};

/// f(R) = (V - R) P(n >= n0), n ~ B(N, p*(R)), for grid rewards that admit a
/// mixed equilibrium. The Stage I recommendation stays R* = n0 * mu.
inline std::vector<MixedProfitPoint> mixed_profit_curve(const AcquisitionScenario& s, const RewardGrid& grid = RewardGrid{}) {
  s.validate();
  if (!s.is_symmetric()) throw DomainError("mixed_profit_curve: scenario is not symmetric information");
  std::vector<MixedProfitPoint> out;
  for (std::size_t k = 0; k < grid.points; ++k) {
    const double r = grid.at(k, s.revenue);
    const auto p = solve_symmetric_mixed(s, r);
    if (!p) continue;
    MixedProfitPoint pt;
    pt.reward = r;
    pt.probability = *p;
    pt.success_prob = binom_tail(BinomialSpec(s.users, *p), s.required);
    pt.profit = (s.revenue - r) * pt.success_prob;
    out.push_back(pt);
  }
  return out;
}

struct ScenarioComparison {
  double symmetric_reward = 0.0;
  double symmetric_profit = 0.0;  // V - n0*mu, or 0
  double asymmetric_reward_a = 0.0;
  double asymmetric_profit_a = 0.0;
  double asymmetric_reward_b = 0.0;
  double asymmetric_profit_b = 0.0;
  bool asymmetric_not_above_symmetric = true;  // checked only when V >= n0*mu
  bool model_b_reward_not_below_a = true;
  std::vector<std::string> violations;
};

/// Symmetric vs asymmetric master profit for one (N, n0, V, F), plus the
/// Model A / Model B reward ordering under asymmetric information.
inline ScenarioComparison compare_information_scenarios(int users, int required, double revenue, const CostModel& costs,
                                                        const RewardGrid& grid = RewardGrid{}, double tol = 1e-12) {
  AcquisitionScenario sym{users, required, revenue, PayoffModel::A, SymmetricInfo{costs}};
  AcquisitionScenario asym_a{users, required, revenue, PayoffModel::A, AsymmetricInfo{costs}};
  AcquisitionScenario asym_b{users, required, revenue, PayoffModel::B, AsymmetricInfo{costs}};

  ScenarioComparison out;
  const auto s = solve_symmetric_pure(sym);
  out.symmetric_reward = s.reward;
  out.symmetric_profit = s.master_profit;
  const auto a = optimize_reward_asymmetric(asym_a, grid);
  out.asymmetric_reward_a = a.reward;
  out.asymmetric_profit_a = a.master_profit;
  const auto b = optimize_reward_asymmetric(asym_b, grid);
  out.asymmetric_reward_b = b.reward;
  out.asymmetric_profit_b = b.master_profit;

  const double mu = costs.mean();
  if (revenue >= required * mu && out.asymmetric_profit_a > out.symmetric_profit + tol) {
    out.asymmetric_not_above_symmetric = false;
    out.violations.push_back("asymmetric profit exceeds symmetric profit");
  }
  if (out.asymmetric_reward_b + tol < out.asymmetric_reward_a) {
    out.model_b_reward_not_below_a = false;
    out.violations.push_back("model B reward below model A reward");
  }
  return out;
}

}  // namespace collab
