#pragma once

// Binomial / multinomial probability kernels and the seeded generator used
// by every solver and simulation in the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "collab/errors.hpp"

namespace collab {

// ---------------------------------------------------------------------------
// Compensated accumulation
// ---------------------------------------------------------------------------

/// Neumaier (improved Kahan) running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// Binomial distribution
// ---------------------------------------------------------------------------

struct BinomialSpec {
  int trials = 0;
  double success_prob = 0.0;

  BinomialSpec() = default;
  BinomialSpec(int n, double p) : trials(n), success_prob(p) {
    if (n < 0) throw DomainError("BinomialSpec: trials must be >= 0");
    if (!(p >= 0.0 && p <= 1.0)) {
      throw DomainError("BinomialSpec: success_prob must lie in [0,1], got " + std::to_string(p));
    }
  }
};

namespace detail {

inline double log_factorial(int n) {
  thread_local std::vector<double> cache{0.0};
  while (static_cast<int>(cache.size()) <= n) cache.push_back(std::lgamma(static_cast<double>(cache.size()) + 1.0));
  return cache[static_cast<std::size_t>(n)];
}

}  // namespace detail

inline double log_choose(int n, int k) {
  return detail::log_factorial(n) - detail::log_factorial(k) - detail::log_factorial(n - k);
}

/// P(X = k) for X ~ B(trials, p), evaluated in log space.
inline double binom_pmf(const BinomialSpec& spec, int k) {
  const int n = spec.trials;
  const double p = spec.success_prob;
  if (k < 0 || k > n) {
    throw DomainError("binom_pmf: k=" + std::to_string(k) + " outside [0," + std::to_string(n) + "]");
  }
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double log_pmf = log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p);
  return std::exp(log_pmf);
}

/// Full pmf vector, index k holds P(X = k).
inline std::vector<double> binom_pmf_table(const BinomialSpec& spec) {
  const int n = spec.trials;
  const double p = spec.success_prob;
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  if (p == 0.0 || p == 1.0) {
    out[p == 0.0 ? 0 : static_cast<std::size_t>(n)] = 1.0;
    return out;
  }
  const double lp = std::log(p), lq = std::log1p(-p);
  for (int k = 0; k <= n; ++k) out[static_cast<std::size_t>(k)] = std::exp(log_choose(n, k) + k * lp + (n - k) * lq);
  return out;
}

/// Precomputed pmf of one binomial with its terms ordered by ascending mass,
/// for evaluating many expectations against the same distribution.
class BinomialTable {
 public:
  explicit BinomialTable(const BinomialSpec& spec) : spec_(spec), pmf_(binom_pmf_table(spec)) {
    // The pmf rises to the mode and then falls, so merging from both ends
    // gives ascending mass without a sort.
    order_.reserve(pmf_.size());
    std::size_t lo = 0, hi = pmf_.size();
    while (lo < hi) {
      const std::size_t k = pmf_[lo] <= pmf_[hi - 1] ? lo++ : --hi;
      if (pmf_[k] != 0.0) order_.push_back(k);
    }
  }

  const BinomialSpec& spec() const { return spec_; }
  std::span<const double> pmf() const { return pmf_; }

  /// E[g(X)], compensated, ascending pmf order. Non-finite g(k) with mass throws.
  template <typename Fn>
  double expect(Fn&& g) const {
    CompensatedSum acc;
    for (std::size_t k : order_) {
      const double v = static_cast<double>(g(static_cast<int>(k)));
      if (!std::isfinite(v)) throw NumericalError("binom_expect: g(" + std::to_string(k) + ") is not finite");
      acc.add(pmf_[k] * v);
    }
    return acc.value();
  }

  /// P(X >= threshold).
  double tail(int threshold) const {
    if (threshold <= 0) return 1.0;
    if (threshold > spec_.trials) return 0.0;
    CompensatedSum acc;
    for (std::size_t k : order_) {
      if (static_cast<int>(k) >= threshold) acc.add(pmf_[k]);
    }
    return std::min(1.0, acc.value());
  }

 private:
  BinomialSpec spec_;
  std::vector<double> pmf_;
  std::vector<std::size_t> order_;
};

/// P(X >= threshold). Thresholds <= 0 give 1, thresholds beyond `trials` give 0.
inline double binom_tail(const BinomialSpec& spec, int threshold) {
  if (threshold <= 0) return 1.0;
  if (threshold > spec.trials) return 0.0;
  return BinomialTable(spec).tail(threshold);
}

/// E[g(X)] for X ~ B(trials, p). Terms are accumulated in ascending pmf order
/// with compensation; any non-finite g(k) carrying nonzero mass is rejected.
template <typename Fn>
double binom_expect(const BinomialSpec& spec, Fn&& g) {
  return BinomialTable(spec).expect(std::forward<Fn>(g));
}

// ---------------------------------------------------------------------------
// Compositions (type-count vectors)
// ---------------------------------------------------------------------------

using TypeCountVector = std::vector<int>;

/// Number of vectors of `parts` nonnegative integers summing to `total`,
/// i.e. C(total + parts - 1, parts - 1). Saturates at uint64 max.
inline std::uint64_t composition_count(int total, int parts) {
  if (total < 0 || parts < 1) throw DomainError("composition_count: need total >= 0, parts >= 1");
  const std::uint64_t n = static_cast<std::uint64_t>(total) + static_cast<std::uint64_t>(parts) - 1;
  std::uint64_t k = static_cast<std::uint64_t>(parts) - 1;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // result * num / i is exact at every step; guard the multiplication.
    if (result > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * num / i;
  }
  return result;
}

/// Range over every composition of `total` into `parts` nonnegative integers,
/// in lexicographically ascending order: (0,...,0,total) first, (total,0,...,0) last.
class Compositions {
 public:
  Compositions(int total, int parts) : total_(total), parts_(parts) {
    if (total < 0) throw DomainError("Compositions: total must be >= 0");
    if (parts < 1) throw DomainError("Compositions: parts must be >= 1");
  }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = TypeCountVector;
    using difference_type = std::ptrdiff_t;
    using pointer = const TypeCountVector*;
    using reference = const TypeCountVector&;

    iterator() = default;
    iterator(int total, int parts) : total_(total), current_(static_cast<std::size_t>(parts), 0), done_(false) {
      current_.back() = total;
    }

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }

    iterator& operator++() {
      advance();
      return *this;
    }
    void operator++(int) { advance(); }

    friend bool operator==(const iterator& a, const iterator& b) {
      if (a.done_ || b.done_) return a.done_ == b.done_;
      return a.current_ == b.current_;
    }

   private:
    void advance() {
      const std::size_t last = current_.size() - 1;
      if (last == 0 || current_.front() == total_) {
        done_ = true;
        return;
      }
      // Rightmost position j < last that still has mass somewhere to its right.
      std::size_t j = last - 1;
      if (current_[last] == 0) {
        std::size_t nz = last - 1;
        while (current_[nz] == 0) --nz;
        j = nz - 1;
      }
      ++current_[j];
      int used = 0;
      for (std::size_t i = 0; i <= j; ++i) used += current_[i];
      for (std::size_t i = j + 1; i < last; ++i) current_[i] = 0;
      current_[last] = total_ - used;
    }

    int total_ = 0;
    TypeCountVector current_;
    bool done_ = true;
  };

  iterator begin() const { return iterator(total_, parts_); }
  iterator end() const { return iterator(); }
  std::uint64_t size() const { return composition_count(total_, parts_); }

 private:
  int total_;
  int parts_;
};

inline Compositions multinomial_compositions(int total, int parts) { return Compositions(total, parts); }

/// log of the multinomial pmf N!/prod(n_i!) prod(q_i^{n_i}).
inline double multinomial_log_pmf(std::span<const int> counts, std::span<const double> probs) {
  if (counts.size() != probs.size()) throw DomainError("multinomial_log_pmf: size mismatch");
  int total = 0;
  double out = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    total += counts[i];
    out -= std::lgamma(counts[i] + 1.0);
    if (counts[i] > 0) {
      if (probs[i] == 0.0) return -std::numeric_limits<double>::infinity();
      out += counts[i] * std::log(probs[i]);
    }
  }
  return out + std::lgamma(total + 1.0);
}

/// Validates a probability vector: entries in [0,1], sum 1 within 1e-9.
inline void validate_probabilities(std::span<const double> q, const char* who) {
  if (q.empty()) throw DomainError(std::string(who) + ": empty probability vector");
  CompensatedSum s;
  for (double v : q) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(who) + ": probability outside [0,1]");
    s.add(v);
  }
  if (std::abs(s.value() - 1.0) > 1e-9) {
    throw DomainError(std::string(who) + ": probabilities sum to " + std::to_string(s.value()) + ", expected 1");
  }
}

// ---------------------------------------------------------------------------
// Seeded generator
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer. Used to derive independent sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Sub-seed for stream `index` of a master seed:
///   splitmix64(splitmix64(master) ^ splitmix64(index + 1)).
/// Streams are independent of how many other streams were consumed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 1));
}

/// Seeded generator. The engine is std::mt19937_64, whose output sequence is
/// fixed by the standard; the variate transforms below are written out
/// explicitly instead of using <random> distributions, whose algorithms are
/// implementation-defined. Not shareable across threads.
class RngHandle {
 public:
  explicit RngHandle(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    if (n == 0) throw DomainError("RngHandle::index: empty range");
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// One multinomial draw of `total` users over the categories of `q`,
/// by independent categorical draws per user.
inline TypeCountVector sample_type_counts(int total, std::span<const double> q, RngHandle& rng) {
  if (total < 0) throw DomainError("sample_type_counts: total must be >= 0");
  validate_probabilities(q, "sample_type_counts");
  std::vector<double> cumulative(q.size());
  std::partial_sum(q.begin(), q.end(), cumulative.begin());
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) last_positive = i;
  }
  TypeCountVector counts(q.size(), 0);
  for (int u = 0; u < total; ++u) {
    const double x = rng.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    std::size_t cat = it == cumulative.end() ? last_positive : static_cast<std::size_t>(it - cumulative.begin());
    if (q[cat] == 0.0) cat = last_positive;
    ++counts[cat];
  }
  return counts;
}

}  // namespace collab
