#pragma once

// Constrained optimization problems with decision and stochastic variables,
// and the Monte-Carlo RDU preference estimator for candidate decisions.

#include <compare>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rdu/decision.hpp"
#include "rdu/stochastic.hpp"

namespace rdu {

struct DecisionVar {
  std::string name;
  int lo = 0;
  int hi = 0;

  int domain_size() const { return hi - lo + 1; }
};

struct LinearTerm {
  double coefficient = 0.0;
  std::string var;
};

// sum(coefficient * var) (== | <=) constant, over decision variables only.
struct Constraint {
  enum class Kind { LinearEq, LinearLe };

  Kind kind = Kind::LinearEq;
  std::vector<LinearTerm> terms;
  double constant = 0.0;
};

enum class Sense { Maximize, Minimize };

using ObjectiveFn =
    std::function<double(std::span<const int> decision, std::span<const int> stochastic)>;

struct StochasticObjective {
  ObjectiveFn evaluate;
  Sense sense = Sense::Maximize;
};

using Decision = std::vector<int>;

struct ConstraintReport {
  std::size_t index = 0;
  // lhs - constant; zero means satisfied for equalities, <= 0 for inequalities.
  double signed_violation = 0.0;
  bool satisfied = true;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<ConstraintReport> constraints;
};

struct PreferenceEstimate {
  double rdu_value = 0.0;
  std::vector<double> sample_objectives;  // ascending

  friend bool operator==(const PreferenceEstimate&, const PreferenceEstimate&) = default;
};

// Immutable once built. Constraint terms are resolved to variable indices at
// construction; unknown or duplicate names throw.
class CopInstance {
 public:
  CopInstance(std::vector<DecisionVar> decision_vars,
              std::vector<StochasticVar> stochastic_vars,
              std::vector<Constraint> constraints, StochasticObjective objective,
              Deformation phi = Deformation::identity(), int k = kDefaultSampleCount);

  const std::vector<DecisionVar>& decision_vars() const { return decision_vars_; }
  const std::vector<StochasticVar>& stochastic_vars() const { return stochastic_vars_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const StochasticObjective& objective() const { return objective_; }
  const Deformation& phi() const { return phi_; }
  int k() const { return k_; }

  std::size_t index_of(const std::string& decision_var) const;

  // Dense rows: coefficient of decision variable j in constraint i.
  const std::vector<std::vector<double>>& coefficient_rows() const { return rows_; }
  // True when every coefficient and constant is integral; feasibility is then
  // checked exactly in 64-bit integers.
  bool integral() const { return integral_; }

  bool in_domain(std::span<const int> d) const;

 private:
  std::vector<DecisionVar> decision_vars_;
  std::vector<StochasticVar> stochastic_vars_;
  std::vector<Constraint> constraints_;
  StochasticObjective objective_;
  Deformation phi_;
  int k_;
  std::vector<std::vector<double>> rows_;
  bool integral_ = true;
};

inline constexpr double kFeasibilityTolerance = 1e-9;

// Throws InvalidInstance when d has the wrong length or leaves its domain.
FeasibilityReport is_feasible(const CopInstance& inst, std::span<const int> d);

// Batch drawn from the instance's stochastic variables.
SampleBatch draw_batch(const CopInstance& inst, RngStream& rng);

// Algorithm 1 over a fixed batch: evaluates f on every row, sorts, and
// applies the equal-weight RDU formula. Minimize instances are handled by
// estimating on -f and negating. Throws InfeasibleDecision.
PreferenceEstimate estimate_preference(const CopInstance& inst, std::span<const int> d,
                                       const SampleBatch& batch);

// Ordering of two estimates for the given sense: greater means the first is
// preferred. Ties on RDU fall back to lexicographic comparison of the sorted
// utility samples (worst sample first).
std::weak_ordering compare_estimates(const PreferenceEstimate& a, const PreferenceEstimate& b,
                                     Sense sense);

// Both decisions are estimated on the same batch.
std::weak_ordering compare(const CopInstance& inst, std::span<const int> d1,
                           std::span<const int> d2, const SampleBatch& batch);

// Reusable estimator that caches the deformed rank weights for (phi, k) and
// skips the feasibility check. Used by the solvers on the hot path.
class PreferenceEvaluator {
 public:
  PreferenceEvaluator(const CopInstance& inst, const SampleBatch& batch);

  PreferenceEstimate operator()(std::span<const int> d) const;

  // Equal-weight RDU of already sorted utility samples.
  double rank_dependent_value(std::span<const double> sorted_utilities) const;

 private:
  const CopInstance& inst_;
  const SampleBatch& batch_;
  std::vector<double> weights_;  // weights_[i] = phi((k - i) / k), i = 1..k-1
};

}  // namespace rdu
