#pragma once

// User collaboration-cost information: a realized cost vector (complete
// information) or a distribution F(.) known to the master (incomplete).

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "collab/errors.hpp"
#include "collab/prob_kernels.hpp"

namespace collab {

/// Realized per-user costs, all strictly positive.
class KnownCosts {
 public:
  KnownCosts() = default;
  explicit KnownCosts(std::vector<double> costs) : costs_(std::move(costs)) {
    for (std::size_t i = 0; i < costs_.size(); ++i) {
      if (!(costs_[i] > 0.0) || !std::isfinite(costs_[i])) {
        throw DomainError("KnownCosts: cost of user " + std::to_string(i) + " must be finite and > 0");
      }
    }
  }

  std::size_t size() const { return costs_.size(); }
  double operator[](std::size_t i) const { return costs_[i]; }
  const std::vector<double>& values() const { return costs_; }

 private:
  std::vector<double> costs_;
};

/// Uniform on [0, upper].
struct UniformCost {
  double upper = 1.0;
};

/// Untruncated normal. A zero standard deviation is a point mass at `mean`.
struct GaussianCost {
  double mean = 0.0;
  double stddev = 1.0;
};

/// Empirical step distribution over observed samples (ties keep multiplicity).
struct EmpiricalCost {
  std::vector<double> samples;  // sorted ascending
};

/// Cost distribution F(.), immutable after construction.
class CostModel {
 public:
  using Variant = std::variant<UniformCost, GaussianCost, EmpiricalCost>;

  static CostModel uniform(double upper) {
    if (!(upper > 0.0) || !std::isfinite(upper)) throw DomainError("uniform cost model: upper bound must be > 0");
    return CostModel(UniformCost{upper});
  }

  static CostModel gaussian(double mean, double stddev) {
    if (!std::isfinite(mean)) throw DomainError("gaussian cost model: mean must be finite");
    if (!(stddev >= 0.0) || !std::isfinite(stddev)) throw DomainError("gaussian cost model: stddev must be >= 0");
    return CostModel(GaussianCost{mean, stddev});
  }

  static CostModel empirical(std::vector<double> samples) {
    if (samples.empty()) throw DomainError("empirical cost model: need at least one sample");
    for (double s : samples) {
      if (!std::isfinite(s)) throw DomainError("empirical cost model: samples must be finite");
    }
    std::sort(samples.begin(), samples.end());
    return CostModel(EmpiricalCost{std::move(samples)});
  }

  const Variant& kind() const { return model_; }

  std::string name() const {
    return std::visit(
        [](const auto& m) -> std::string {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, UniformCost>) return "uniform";
          else if constexpr (std::is_same_v<T, GaussianCost>) return "gaussian";
          else return "empirical";
        },
        model_);
  }

  /// F(gamma) = P(C <= gamma).
  double cdf(double gamma) const {
    return std::visit(
        [gamma](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, UniformCost>) {
            return std::min(std::max(gamma / m.upper, 0.0), 1.0);
          } else if constexpr (std::is_same_v<T, GaussianCost>) {
            if (m.stddev == 0.0) return gamma >= m.mean ? 1.0 : 0.0;
            return 0.5 * std::erfc(-(gamma - m.mean) / (m.stddev * std::sqrt(2.0)));
          } else {
            const auto it = std::upper_bound(m.samples.begin(), m.samples.end(), gamma);
            return static_cast<double>(it - m.samples.begin()) / static_cast<double>(m.samples.size());
          }
        },
        model_);
  }

  double mean() const {
    return std::visit(
        [](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, UniformCost>) {
            return m.upper / 2.0;
          } else if constexpr (std::is_same_v<T, GaussianCost>) {
            return m.mean;
          } else {
            CompensatedSum s;
            for (double v : m.samples) s.add(v);
            return s.value() / static_cast<double>(m.samples.size());
          }
        },
        model_);
  }

  /// True when F has jumps (point masses), so thresholds need not be unique roots.
  bool has_atoms() const {
    if (std::holds_alternative<EmpiricalCost>(model_)) return true;
    if (const auto* g = std::get_if<GaussianCost>(&model_)) return g->stddev == 0.0;
    return false;
  }

  /// `count` i.i.d. draws. Draws at or below zero (possible for the
  /// untruncated normal or nonpositive empirical samples) are raised to `floor`.
  KnownCosts sample(RngHandle& rng, std::size_t count, double floor = 1e-6) const {
    if (count == 0) throw DomainError("CostModel::sample: count must be >= 1");
    if (!(floor > 0.0)) throw DomainError("CostModel::sample: floor must be > 0");
    std::vector<double> out(count);
    for (auto& x : out) {
      x = std::visit(
          [&rng](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, UniformCost>) {
              return m.upper * rng.uniform();
            } else if constexpr (std::is_same_v<T, GaussianCost>) {
              return m.stddev == 0.0 ? m.mean : m.mean + m.stddev * rng.normal();
            } else {
              return m.samples[rng.index(m.samples.size())];
            }
          },
          model_);
      if (x <= 0.0) x = floor;
    }
    return KnownCosts(std::move(out));
  }

 private:
  explicit CostModel(Variant v) : model_(std::move(v)) {}
  Variant model_;
};

}  // namespace collab
