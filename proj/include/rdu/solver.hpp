#pragma once

// Budgeted anytime local search over feasible decisions, ranked by estimated
// RDU preference, and an exhaustive enumerator used as ground truth.

#include <cstdint>
#include <vector>

#include "rdu/cop.hpp"

namespace rdu {

struct Budget {
  enum class Kind { WallClockMs, Iterations };

  Kind kind = Kind::WallClockMs;
  std::int64_t amount = 100;

  static Budget milliseconds(std::int64_t ms) { return {Kind::WallClockMs, ms}; }
  static Budget iterations(std::int64_t n) { return {Kind::Iterations, n}; }

  friend bool operator==(const Budget&, const Budget&) = default;
};

struct SolverConfig {
  Budget budget = Budget::milliseconds(100);
  int restart_interval = 200;
  int tabu_tenure = 4;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Improvement {
  std::int64_t iteration = 0;
  double rdu_value = 0.0;

  friend bool operator==(const Improvement&, const Improvement&) = default;
};

struct SolveResult {
  Decision best_decision;
  PreferenceEstimate best_preference;
  bool feasible_found = false;
  std::int64_t iterations = 0;
  std::int64_t evaluations = 0;
  // Every strict improvement of the incumbent, in order.
  std::vector<Improvement> history;

  friend bool operator==(const SolveResult&, const SolveResult&) = default;
};

// Two-phase local search:
//   1. from a uniform random assignment, tabu steepest descent on the total
//      constraint violation using single-variable +-1 moves;
//   2. from a feasible point, stochastic hill climbing on the estimated
//      preference. Candidates are feasible single or paired +-1 moves, or a
//      +-1 kick on one variable followed by greedy violation repair;
//      equal-preference moves are accepted with probability 0.5.
// Either phase restarts after restart_interval non-improving iterations.
// Iteration budgets give results that depend only on (instance, config, batch).
SolveResult solve(const CopInstance& inst, const SolverConfig& cfg, const SampleBatch& batch);

inline constexpr double kExhaustiveLimit = 1e7;

// Enumerates every assignment in lexicographic order and keeps the first
// preference maximum. Throws InstanceTooLarge above kExhaustiveLimit points.
SolveResult solve_exhaustive(const CopInstance& inst, const SampleBatch& batch);

}  // namespace rdu
