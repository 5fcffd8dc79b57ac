#pragma once

// Repeated time slots with fresh cost / type realizations per slot. Slot t
// draws from its own generator seeded with derive_seed(seed, t).

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "collab/acquisition_game.hpp"
#include "collab/contract_design.hpp"
#include "collab/errors.hpp"
#include "collab/prob_kernels.hpp"

namespace collab {

struct AcquisitionSlot {
  int slot = 0;
  int collaborators = 0;
  bool success = false;
  double realized_profit = 0.0;  // V - R on success, else 0
};

struct AcquisitionRun {
  double reward = 0.0;
  std::optional<double> gamma;  // threshold used; none means nobody collaborates
  std::uint64_t seed = 0;
  std::vector<AcquisitionSlot> records;
};

/// Users collaborate iff their drawn cost is at most gamma*(R).
inline AcquisitionRun simulate_acquisition(const AcquisitionScenario& s, double reward, int slots, std::uint64_t seed) {
  s.validate();
  if (!s.is_asymmetric()) throw DomainError("simulate_acquisition: scenario is not asymmetric information");
  if (slots < 1) throw DomainError("simulate_acquisition: need at least one slot");
  if (!(reward >= 0.0) || reward > s.revenue) throw DomainError("simulate_acquisition: reward must lie in [0, V]");

  AcquisitionRun run;
  run.reward = reward;
  run.seed = seed;
  run.gamma = solve_asymmetric_threshold(s, reward);
  run.records.reserve(slots);
  for (int t = 0; t < slots; ++t) {
    RngHandle rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    const auto costs = s.cost_model().sample(rng, static_cast<std::size_t>(s.users));
    AcquisitionSlot rec;
    rec.slot = t;
    if (run.gamma) {
      for (double c : costs.values()) rec.collaborators += c <= *run.gamma ? 1 : 0;
    }
    rec.success = rec.collaborators >= s.required;
    rec.realized_profit = rec.success ? s.revenue - reward : 0.0;
    run.records.push_back(rec);
  }
  return run;
}

struct RealizedComparison {
  double incomplete_profit = 0.0;  // fixed contract, realized counts
  double complete_profit = 0.0;    // re-optimized with the realized counts known
  double ratio = std::numeric_limits<double>::quiet_NaN();  // undefined when complete_profit <= 0
  double user_payoff = 0.0;        // aggregate payoff under the fixed contract
};

/// Realized outcome of `incomplete` against the complete-information optimum
/// for the same realized counts.
inline RealizedComparison compare_realized(const UserTypeProfile& profile, const ContractSolution& incomplete,
                                           std::span<const int> counts) {
  RealizedComparison out;
  const auto& theta = profile.preference();
  out.incomplete_profit = realized_profit(incomplete.contract, counts, theta);
  const auto known = profile.with_counts(std::vector<int>(counts.begin(), counts.end()));
  out.complete_profit = solve_complete(known).expected_profit;
  if (out.complete_profit > 0.0) out.ratio = out.incomplete_profit / out.complete_profit;
  out.user_payoff = aggregate_user_payoff(incomplete, profile.unit_cost(), counts);
  return out;
}

struct ContractSlot {
  int slot = 0;
  TypeCountVector counts;
  RealizedComparison outcome;
};

struct ContractRun {
  std::uint64_t seed = 0;
  std::vector<ContractSlot> records;
};

inline ContractRun simulate_contract(const UserTypeProfile& profile, const ContractSolution& solution, int slots,
                                     std::uint64_t seed) {
  if (slots < 1) throw DomainError("simulate_contract: need at least one slot");
  const auto& d = profile.distribution();
  ContractRun run;
  run.seed = seed;
  run.records.reserve(slots);
  for (int t = 0; t < slots; ++t) {
    RngHandle rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    ContractSlot rec;
    rec.slot = t;
    rec.counts = sample_type_counts(d.users, d.probabilities, rng);
    rec.outcome = compare_realized(profile, solution, rec.counts);
    run.records.push_back(std::move(rec));
  }
  return run;
}

}  // namespace collab
