#include "rdu/production.hpp"

#include <algorithm>
#include <cmath>

#include "rdu/error.hpp"

namespace rdu::production {

char letter(UnitType t) {
  switch (t) {
    case UnitType::Heavy: return 'H';
    case UnitType::Light: return 'L';
    case UnitType::Ranged: return 'R';
  }
  return '?';
}

std::string_view name(UnitType t) {
  switch (t) {
    case UnitType::Heavy: return "heavy";
    case UnitType::Light: return "light";
    case UnitType::Ranged: return "ranged";
  }
  return "?";
}

UnitType parse_unit_type(std::string_view text) {
  for (UnitType t : kUnitTypes) {
    if (text == name(t) || (text.size() == 1 && text[0] == letter(t))) return t;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown unit type '" + std::string(text) + "'");
}

double CounterMatrix::max_reciprocity_error() const {
  double worst = 0.0;
  for (std::size_t a = 0; a < kNumTypes; ++a) {
    for (std::size_t b = 0; b < kNumTypes; ++b) {
      worst = std::max(worst, std::abs(need[a][b] * need[b][a] - 1.0));
    }
  }
  return worst;
}

void CounterMatrix::validate() const {
  for (const auto& row : need) {
    for (double v : row) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::InvalidConfig, "counter coefficients must be finite and > 0");
      }
    }
  }
}

CounterMatrix default_coeffs() {
  // H/L is the published pair. The rest are survivor ratios from the arena
  // estimator: default stats, 200 duels of 10 v 10, seed 7.
  CounterMatrix m;
  m.need = {{
      {1.0, 0.3738, 1427.0 / 1066.0},
      {2.675, 1.0, 623.0 / 1525.0},
      {1066.0 / 1427.0, 1525.0 / 623.0, 1.0},
  }};
  return m;
}

CoefficientMode parse_coefficient_mode(std::string_view text) {
  if (text == "counter_power" || text == "counter-power") return CoefficientMode::CounterPower;
  if (text == "literal") return CoefficientMode::Literal;
  throw Error(ErrorKind::InvalidConfig, "unknown coefficient mode '" + std::string(text) + "'");
}

std::string_view to_string(CoefficientMode mode) {
  return mode == CoefficientMode::CounterPower ? "counter_power" : "literal";
}

Decision encode(const ProductionDecision& d) {
  Decision values(kNumDecisionVars, 0);
  for (UnitType x : kUnitTypes) {
    values[plan_index(x)] = d.plan[idx(x)];
    for (UnitType y : kUnitTypes) values[assign_index(x, y)] = d.assign[idx(x)][idx(y)];
  }
  return values;
}

ProductionDecision decode(std::span<const int> values) {
  if (values.size() != kNumDecisionVars) {
    throw Error(ErrorKind::InvalidInstance, "production decision needs 12 values");
  }
  ProductionDecision d;
  for (UnitType x : kUnitTypes) {
    d.plan[idx(x)] = values[plan_index(x)];
    for (UnitType y : kUnitTypes) d.assign[idx(x)][idx(y)] = values[assign_index(x, y)];
  }
  return d;
}

ProductionDecision do_nothing(const ProductionState& state) {
  ProductionDecision d;
  d.plan = state.our_units;
  for (UnitType x : kUnitTypes) d.assign[idx(x)][idx(x)] = state.our_units[idx(x)];
  return d;
}

int production_cost(const UnitCounts& plan, const UnitCounts& our_units) {
  int cost = 0;
  for (UnitType x : kUnitTypes) cost += kUnitCost[idx(x)] * (plan[idx(x)] - our_units[idx(x)]);
  return cost;
}

double objective(std::span<const int> decision, std::span<const int> enemy,
                 const CounterMatrix& coeffs, CoefficientMode mode) {
  double total = 0.0;
  for (UnitType x : kUnitTypes) {
    double strength = 0.0;
    for (UnitType a : kUnitTypes) {
      const double c = mode == CoefficientMode::CounterPower ? coeffs.power(a, x) : coeffs(a, x);
      strength += c * decision[assign_index(a, x)];
    }
    total += std::min(1.0, strength - enemy[idx(x)]);
  }
  return total;
}

std::string stochastic_var_name(UnitType t) { return std::string("enemyUnits_") + letter(t); }

CopInstance build_instance(const ProductionState& state, const CounterMatrix& coeffs,
                           const EnemyDistributions& enemy_priors, const ModelOptions& options) {
  for (UnitType x : kUnitTypes) {
    if (state.our_units[idx(x)] < 0 || state.observed_enemy[idx(x)] < 0) {
      throw Error(ErrorKind::InvalidState, "unit counts must be >= 0");
    }
    if (state.our_units[idx(x)] > options.threshold) {
      throw Error(ErrorKind::InvalidState, "threshold is below our current army");
    }
  }
  if (state.stock < 0) throw Error(ErrorKind::InvalidState, "stock must be >= 0");
  if (options.threshold < 0) throw Error(ErrorKind::InvalidState, "threshold must be >= 0");
  coeffs.validate();

  std::vector<DecisionVar> vars(kNumDecisionVars);
  for (UnitType x : kUnitTypes) {
    vars[plan_index(x)] = {std::string("plan_") + letter(x), 0, options.threshold};
    for (UnitType y : kUnitTypes) {
      vars[assign_index(x, y)] = {std::string("assign_") + letter(x) + letter(y), 0,
                                  options.threshold};
    }
  }

  std::vector<Constraint> constraints;
  for (UnitType x : kUnitTypes) {
    Constraint row{Constraint::Kind::LinearEq, {}, 0.0};
    for (UnitType y : kUnitTypes) row.terms.push_back({1.0, vars[assign_index(x, y)].name});
    row.terms.push_back({-1.0, vars[plan_index(x)].name});
    constraints.push_back(std::move(row));
  }
  Constraint budget{Constraint::Kind::LinearLe, {}, static_cast<double>(state.stock)};
  for (UnitType x : kUnitTypes) {
    budget.terms.push_back({static_cast<double>(kUnitCost[idx(x)]), vars[plan_index(x)].name});
    budget.constant += kUnitCost[idx(x)] * state.our_units[idx(x)];
  }
  constraints.push_back(std::move(budget));
  for (UnitType x : kUnitTypes) {
    // plan_X >= ourUnits_X, written as -plan_X <= -ourUnits_X.
    constraints.push_back({Constraint::Kind::LinearLe,
                           {{-1.0, vars[plan_index(x)].name}},
                           -static_cast<double>(state.our_units[idx(x)])});
  }

  std::vector<StochasticVar> enemy;
  for (UnitType x : kUnitTypes) {
    enemy.push_back({stochastic_var_name(x),
                     condition_at_least(enemy_priors[idx(x)], state.observed_enemy[idx(x)])});
  }

  StochasticObjective goal{
      [coeffs, mode = options.mode](std::span<const int> d, std::span<const int> s) {
        return objective(d, s, coeffs, mode);
      },
      Sense::Maximize};

  return CopInstance(std::move(vars), std::move(enemy), std::move(constraints), std::move(goal),
                     options.phi, options.k);
}

}  // namespace rdu::production
