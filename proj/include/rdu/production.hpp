#pragma once

// Unit-production model for an RTS player as a CopInstance: how many heavy,
// light and ranged units to field and how to assign them against the
// (uncertain) enemy army.

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "rdu/cop.hpp"

namespace rdu::production {

enum class UnitType : std::uint8_t { Heavy = 0, Light = 1, Ranged = 2 };

inline constexpr std::array<UnitType, 3> kUnitTypes = {UnitType::Heavy, UnitType::Light,
                                                       UnitType::Ranged};
inline constexpr std::size_t kNumTypes = 3;

// Resource cost per unit, indexed by UnitType.
inline constexpr std::array<int, kNumTypes> kUnitCost = {3, 2, 2};
inline constexpr int kDefaultThreshold = 20;

constexpr std::size_t idx(UnitType t) { return static_cast<std::size_t>(t); }
char letter(UnitType t);
std::string_view name(UnitType t);
UnitType parse_unit_type(std::string_view text);

using UnitCounts = std::array<int, kNumTypes>;

// need[A][B]: how many units of type A it takes to counter one unit of B.
struct CounterMatrix {
  std::array<std::array<double, kNumTypes>, kNumTypes> need{};

  double operator()(UnitType a, UnitType b) const { return need[idx(a)][idx(b)]; }
  // Enemy-equivalents one unit of A is worth against B.
  double power(UnitType a, UnitType b) const { return 1.0 / need[idx(a)][idx(b)]; }
  double max_reciprocity_error() const;
  void validate() const;

  friend bool operator==(const CounterMatrix&, const CounterMatrix&) = default;
};

// Heavy/light is the published pair; the other off-diagonal entries are the
// arena estimator's output for default stats (200 duels of 10 v 10, seed 7).
CounterMatrix default_coeffs();

// CounterPower uses 1/need[A][B] as the contribution of one assigned unit;
// Literal uses need[A][B] verbatim.
enum class CoefficientMode { CounterPower, Literal };

CoefficientMode parse_coefficient_mode(std::string_view text);
std::string_view to_string(CoefficientMode mode);

struct ProductionState {
  UnitCounts our_units{};
  int stock = 0;
  UnitCounts observed_enemy{};
  int tick = 0;
};

struct ProductionDecision {
  UnitCounts plan{};
  std::array<UnitCounts, kNumTypes> assign{};  // assign[ours][theirs]

  friend bool operator==(const ProductionDecision&, const ProductionDecision&) = default;
};

// Decision vector layout: plan_H, plan_L, plan_R, then assign_XY row-major.
inline constexpr std::size_t kNumDecisionVars = kNumTypes + kNumTypes * kNumTypes;
constexpr std::size_t plan_index(UnitType x) { return idx(x); }
constexpr std::size_t assign_index(UnitType ours, UnitType theirs) {
  return kNumTypes + idx(ours) * kNumTypes + idx(theirs);
}

Decision encode(const ProductionDecision& d);
ProductionDecision decode(std::span<const int> values);

// The decision that builds nothing and counters each type with itself.
ProductionDecision do_nothing(const ProductionState& state);

// 3 dH + 2 dL + 2 dR for a plan relative to the current army.
int production_cost(const UnitCounts& plan, const UnitCounts& our_units);

// Sum over X of min{1, sum_A c(A,X) assign[A][X] - enemy[X]}.
double objective(std::span<const int> decision, std::span<const int> enemy,
                 const CounterMatrix& coeffs, CoefficientMode mode);

using EnemyDistributions = std::array<DiscreteDistribution, kNumTypes>;

struct ModelOptions {
  Deformation phi = Deformation::identity();
  int k = kDefaultSampleCount;
  int threshold = kDefaultThreshold;
  CoefficientMode mode = CoefficientMode::CounterPower;
};

// Enemy priors are conditioned on observed_enemy before use. Throws
// InvalidState for negative counts/stock or threshold below our army.
CopInstance build_instance(const ProductionState& state, const CounterMatrix& coeffs,
                           const EnemyDistributions& enemy_priors, const ModelOptions& options);

std::string stochastic_var_name(UnitType t);

}  // namespace rdu::production
