#pragma once

// JSON readers and writers for lotteries, distributions, instances, unit
// stats, scenarios and match summaries.

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "rdu/arena.hpp"
#include "rdu/cop.hpp"
#include "rdu/decision.hpp"
#include "rdu/production.hpp"
#include "rdu/solver.hpp"
#include "rdu/stochastic.hpp"

namespace rdu::io {

using nlohmann::json;

// Syntax errors become ParseError with "<source>: line L, column C: ...".
json parse_json(std::string_view text, const std::string& source = "<input>");
json read_json_file(const std::string& path);

// [{"x": 0, "p": 0.5}, {"x": 10, "p": 0.5}]
Lottery lottery_from_json(const json& j);
json to_json(const Lottery& lottery);

// {"support": [[0, 0.25], [1, 0.75]]}
DiscreteDistribution distribution_from_json(const json& j);
json to_json(const DiscreteDistribution& dist);

// "logistic:10:1.3", or {"kind": "logistic", "lambda": 10, "shift": 1.3},
// or {"kind": "custom", "knots": [[0, 0], [1, 1]]}.
Deformation deformation_from_json(const json& j);
json to_json(const Deformation& phi);

// {"enemyUnits_L": [{"from": 0, "to": 100, "family": "poisson_linear",
//   "intercept": 1, "slope": 0.1}, {"family": "fixed", "support": [[2, 1]]}]}
// from/to default to the whole game.
DistributionGenerator generator_from_json(const json& j);
json to_json(const DistributionGenerator& gen);

// {"budget_ms": 100} or {"budget_iters": 5000}, plus optional "seed",
// "tabu", "restart". Missing fields keep the values of `base`.
SolverConfig solver_config_from_json(const json& j, SolverConfig base = {});

// {"need": [[1, 0.3738, ...], ...]}
production::CounterMatrix counter_matrix_from_json(const json& j);
json to_json(const production::CounterMatrix& m);

// Unit counts as {"H": 1, "L": 0, "R": 2} or [1, 0, 2].
production::UnitCounts unit_counts_from_json(const json& j);
json to_json(const production::ProductionDecision& d);

// {"our_units": ..., "stock": 6, "observed_enemy": ..., "tick": 0}
production::ProductionState production_state_from_json(const json& j);

struct LoadedInstance {
  CopInstance instance;
  std::optional<SolverConfig> solver;
  // Present for the "production" form so results can be decoded.
  std::optional<production::ProductionState> production_state;
};

// Generic form:
//   {"decision_vars": [{"name": "x", "lo": 0, "hi": 5}],
//    "stochastic_vars": [{"name": "s", "support": [[0, 0.5], [1, 0.5]]}],
//    "constraints": [{"kind": "le", "terms": [[1, "x"]], "constant": 4}],
//    "objective": {"sense": "max", "targets": [
//        {"constant": 0, "decision": {"x": 1}, "stochastic": {"s": -1}, "cap": 1}]},
//    "phi": "identity", "k": 50, "solver": {"budget_iters": 5000}}
// The objective is the sum over targets of min(cap, constant + linear terms);
// a target without "cap" is uncapped.
//
// Production form:
//   {"production": {"state": {...}, "coeffs": {"need": ...}, "mode": "counter_power",
//                   "threshold": 20, "enemy": {"H": {"support": ...}, ...}},
//    "phi": "logistic", "k": 50}
// "enemy" may be replaced by "generator" (a generator config evaluated at the
// state's tick). coeffs default to the built-in matrix.
LoadedInstance instance_from_json(const json& j);

json decision_to_json(const CopInstance& inst, std::span<const int> d);

// {"hit_points": [7, 5, 5], "damage": [2, 2, 2],
//  "multiplier": [[1, 1.4, 0.7], ...], "hit_chance": 0.1}; missing fields
// keep the defaults.
arena::UnitStats unit_stats_from_json(const json& j);
json to_json(const arena::UnitStats& stats);

// Every field optional; see Scenario for names. "stats", "coeffs",
// "enemy_prior" and "solver" use the formats above, "player" holds
// stock/income_per_tick/units/base_hit_points.
arena::Scenario scenario_from_json(const json& j);

json summary_to_json(const arena::MatchResult& result);

}  // namespace rdu::io
