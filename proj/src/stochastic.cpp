#include "rdu/stochastic.hpp"

#include <algorithm>
#include <cmath>

#include "rdu/error.hpp"

namespace rdu {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;
constexpr double kMassTolerance = 1e-6;

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed ^ mix64(stream + kStreamSalt))) {}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
  if (range == 0) return static_cast<std::int64_t>(next_u64());
  // Rejection on the top of the 64-bit range keeps it unbiased.
  const std::uint64_t limit = (~std::uint64_t{0} / range) * range;
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw >= limit);
  return lo + static_cast<std::int64_t>(draw % range);
}

bool RngStream::bernoulli(double p) { return uniform01() < p; }

int RngStream::binomial(int trials, double p) {
  int hits = 0;
  for (int i = 0; i < trials; ++i) hits += bernoulli(p) ? 1 : 0;
  return hits;
}

RngStream RngStream::split(std::uint64_t index) const {
  RngStream child;
  child.key_ = mix64(key_ ^ mix64(index * kGamma + kStreamSalt));
  return child;
}

DiscreteDistribution::DiscreteDistribution(std::vector<SupportPoint> support) {
  double mass = 0.0;
  for (const SupportPoint& s : support) {
    if (!std::isfinite(s.probability)) {
      throw Error(ErrorKind::ProbabilityMassInvalid, "non-finite probability");
    }
    if (s.probability < 0.0) {
      throw Error(ErrorKind::NegativeProbability,
                  "value " + std::to_string(s.value) + " has probability " +
                      std::to_string(s.probability));
    }
    mass += s.probability;
  }
  if (support.empty() || std::abs(mass - 1.0) > kMassTolerance) {
    throw Error(ErrorKind::ProbabilityMassInvalid,
                "distribution mass is " + std::to_string(mass));
  }
  std::stable_sort(support.begin(), support.end(),
                   [](const SupportPoint& a, const SupportPoint& b) { return a.value < b.value; });
  for (const SupportPoint& s : support) {
    if (s.probability == 0.0) continue;
    if (!support_.empty() && support_.back().value == s.value) {
      support_.back().probability += s.probability;
    } else {
      support_.push_back(s);
    }
  }
  double kept = 0.0;
  for (const SupportPoint& s : support_) kept += s.probability;
  // Leave near-normalized input alone so serialization round-trips exactly.
  const double scale = std::abs(kept - 1.0) > 1e-12 ? kept : 1.0;
  double running = 0.0;
  cumulative_.reserve(support_.size());
  for (SupportPoint& s : support_) {
    s.probability /= scale;
    running += s.probability;
    cumulative_.push_back(running);
  }
}

DiscreteDistribution DiscreteDistribution::point_mass(int value) {
  return DiscreteDistribution({{value, 1.0}});
}

DiscreteDistribution DiscreteDistribution::uniform(int lo, int hi) {
  if (hi < lo) throw Error(ErrorKind::InvalidDistribution, "uniform with hi < lo");
  std::vector<SupportPoint> support;
  const double p = 1.0 / static_cast<double>(hi - lo + 1);
  for (int v = lo; v <= hi; ++v) support.push_back({v, p});
  return DiscreteDistribution(std::move(support));
}

double DiscreteDistribution::probability_of(int value) const {
  const auto it = std::lower_bound(
      support_.begin(), support_.end(), value,
      [](const SupportPoint& s, int v) { return s.value < v; });
  return (it != support_.end() && it->value == value) ? it->probability : 0.0;
}

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (const SupportPoint& s : support_) m += s.value * s.probability;
  return m;
}

int DiscreteDistribution::sample(RngStream& rng) const {
  const double u = rng.uniform01();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) return support_.back().value;
  return support_[static_cast<std::size_t>(it - cumulative_.begin())].value;
}

DiscreteDistribution condition_at_least(const DiscreteDistribution& dist, int observed) {
  if (observed <= dist.min_value()) return dist;
  std::vector<SupportPoint> kept;
  double mass = 0.0;
  for (const SupportPoint& s : dist.support()) {
    if (s.value >= observed) {
      kept.push_back(s);
      mass += s.probability;
    }
  }
  if (kept.empty()) return DiscreteDistribution::point_mass(observed);
  for (SupportPoint& s : kept) s.probability /= mass;
  return DiscreteDistribution(std::move(kept));
}

SampleBatch::SampleBatch(std::size_t rows, std::size_t cols, std::vector<int> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorKind::InvalidInstance, "sample batch shape mismatch");
  }
}

SampleBatch sample_batch(std::span<const StochasticVar> vars, int k, RngStream& rng) {
  if (k < 1) throw Error(ErrorKind::InvalidConfig, "sample count k must be >= 1");
  std::vector<int> values;
  values.reserve(static_cast<std::size_t>(k) * vars.size());
  for (int i = 0; i < k; ++i) {
    for (const StochasticVar& var : vars) values.push_back(var.distribution.sample(rng));
  }
  return SampleBatch(static_cast<std::size_t>(k), vars.size(), std::move(values));
}

DiscreteDistribution truncated_poisson(double mean, int threshold) {
  if (threshold < 0 || !(mean >= 0.0) || !std::isfinite(mean)) {
    throw Error(ErrorKind::InvalidDistribution, "truncated Poisson needs mean >= 0, threshold >= 0");
  }
  if (mean == 0.0) return DiscreteDistribution::point_mass(0);
  // Work in log space so large means do not underflow exp(-mean).
  std::vector<double> logs;
  double log_pmf = -mean;
  for (int v = 0; v <= threshold; ++v) {
    if (v > 0) log_pmf += std::log(mean / v);
    logs.push_back(log_pmf);
  }
  const double peak = *std::max_element(logs.begin(), logs.end());
  double total = 0.0;
  for (double& l : logs) {
    l = std::exp(l - peak);
    total += l;
  }
  std::vector<SupportPoint> support;
  for (int v = 0; v <= threshold; ++v) {
    const double p = logs[static_cast<std::size_t>(v)] / total;
    if (p > 0.0) support.push_back({v, p});
  }
  return DiscreteDistribution(std::move(support));
}

void DistributionGenerator::add_rule(const std::string& var, DistributionRule rule) {
  if (rule.to_tick < rule.from_tick) {
    throw Error(ErrorKind::InvalidConfig, "rule for '" + var + "' has to_tick < from_tick");
  }
  if (rule.family == DistributionRule::Family::Fixed) {
    DiscreteDistribution check(rule.fixed);
    (void)check;
  }
  rules_[var].push_back(std::move(rule));
}

DiscreteDistribution DistributionGenerator::at(const std::string& var, int tick,
                                               int threshold) const {
  const auto found = rules_.find(var);
  if (found == rules_.end() || found->second.empty()) {
    throw Error(ErrorKind::UnknownVariable, "no distribution rule for '" + var + "'");
  }
  const std::vector<DistributionRule>& rules = found->second;
  const DistributionRule* rule = &rules.back();
  for (const DistributionRule& r : rules) {
    if (tick >= r.from_tick && tick <= r.to_tick) {
      rule = &r;
      break;
    }
  }
  const double level = std::max(0.0, rule->intercept + rule->slope * tick);
  switch (rule->family) {
    case DistributionRule::Family::PoissonLinear:
      return truncated_poisson(level, threshold);
    case DistributionRule::Family::UniformLinear:
      return DiscreteDistribution::uniform(
          0, std::min(threshold, static_cast<int>(std::floor(level))));
    case DistributionRule::Family::Fixed:
      return DiscreteDistribution(rule->fixed);
  }
  return DiscreteDistribution::point_mass(0);
}

}  // namespace rdu
