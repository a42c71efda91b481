#pragma once

// Finite integer distributions, reproducible random streams and sampling of
// stochastic variables.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rdu {

// Counter-based generator: the n-th output is splitmix64(key + n * gamma).
// Outputs depend only on (seed, stream, position), so sequences are identical
// on every platform and independent streams can be derived by index.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  // Uniform integer in [lo, hi], unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p);
  int binomial(int trials, double p);

  // Independent child stream; does not advance this stream.
  RngStream split(std::uint64_t index) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

struct SupportPoint {
  int value = 0;
  double probability = 0.0;

  friend bool operator==(const SupportPoint&, const SupportPoint&) = default;
};

// Finite-support distribution over integers. Values strictly increasing,
// probabilities positive and summing to one.
class DiscreteDistribution {
 public:
  // Canonicalizes: sorts, merges duplicate values, drops zeros, renormalizes.
  // Throws NegativeProbability / ProbabilityMassInvalid (tolerance 1e-6).
  explicit DiscreteDistribution(std::vector<SupportPoint> support);

  static DiscreteDistribution point_mass(int value);
  static DiscreteDistribution uniform(int lo, int hi);

  std::span<const SupportPoint> support() const { return support_; }
  int min_value() const { return support_.front().value; }
  int max_value() const { return support_.back().value; }
  double probability_of(int value) const;
  double mean() const;

  int sample(RngStream& rng) const;

  friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

 private:
  std::vector<SupportPoint> support_;
  std::vector<double> cumulative_;
};

struct StochasticVar {
  std::string name;
  DiscreteDistribution distribution;
};

inline int sample(const StochasticVar& var, RngStream& rng) {
  return var.distribution.sample(rng);
}

// Keeps values >= observed and renormalizes; a point mass at `observed` when
// nothing survives. observed <= 0 is a no-op.
DiscreteDistribution condition_at_least(const DiscreteDistribution& dist, int observed);

// k joint samples, one column per stochastic variable, stored row-major.
class SampleBatch {
 public:
  SampleBatch() = default;
  SampleBatch(std::size_t rows, std::size_t cols, std::vector<int> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const int> row(std::size_t i) const {
    return std::span<const int>(values_).subspan(i * cols_, cols_);
  }

  friend bool operator==(const SampleBatch&, const SampleBatch&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<int> values_;
};

inline constexpr int kDefaultSampleCount = 50;

// Row i draws every variable in order from rng; variables are independent.
SampleBatch sample_batch(std::span<const StochasticVar> vars, int k, RngStream& rng);

// Tick-indexed prior for stochastic variables, replacing replay statistics.
//
//   poisson_linear  Poisson(intercept + slope * tick) truncated to [0, threshold]
//   uniform_linear  uniform on [0, min(threshold, floor(intercept + slope * tick))]
//   fixed           an explicit distribution
struct DistributionRule {
  enum class Family { PoissonLinear, UniformLinear, Fixed };

  int from_tick = 0;
  int to_tick = 0;  // inclusive
  Family family = Family::PoissonLinear;
  double intercept = 0.0;
  double slope = 0.0;
  std::vector<SupportPoint> fixed;
};

class DistributionGenerator {
 public:
  void add_rule(const std::string& var, DistributionRule rule);
  bool has(const std::string& var) const { return rules_.count(var) > 0; }

  // First rule covering tick; falls back to the last rule of the variable
  // when tick is beyond every range. Throws UnknownVariable.
  DiscreteDistribution at(const std::string& var, int tick, int threshold) const;

  const std::map<std::string, std::vector<DistributionRule>>& rules() const { return rules_; }

 private:
  std::map<std::string, std::vector<DistributionRule>> rules_;
};

DiscreteDistribution truncated_poisson(double mean, int threshold);

}  // namespace rdu
