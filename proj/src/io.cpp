#include "rdu/io.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "rdu/error.hpp"

namespace rdu::io {

using production::UnitType;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::InvalidConfig, where + ": " + what);
}

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
}

void expect_array(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array");
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  expect_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad(where, "unknown key '" + key + "'");
    }
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v >= std::numeric_limits<int>::min() && v <= std::numeric_limits<int>::max()) {
      return static_cast<int>(v);
    }
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v == static_cast<double>(static_cast<int>(v))) return static_cast<int>(v);
  }
  bad(where, "expected an integer");
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

template <typename T, typename F>
T optional_field(const json& j, const char* key, T fallback, F read, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return read(j.at(key), where + "." + key);
}

std::vector<SupportPoint> support_from_json(const json& j, const std::string& where) {
  expect_array(j, where);
  std::vector<SupportPoint> points;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    const json& pair = j[i];
    if (!pair.is_array() || pair.size() != 2) bad(at, "expected [value, probability]");
    points.push_back({integer(pair[0], at), number(pair[1], at)});
  }
  return points;
}

template <typename T>
std::array<T, production::kNumTypes> triple(const json& j, const std::string& where,
                                           T (*read)(const json&, const std::string&)) {
  if (!j.is_array() || j.size() != production::kNumTypes) bad(where, "expected 3 entries");
  std::array<T, production::kNumTypes> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = read(j[i], where);
  return out;
}

std::array<std::array<double, 3>, 3> matrix3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) bad(where, "expected a 3x3 matrix");
  std::array<std::array<double, 3>, 3> m{};
  for (std::size_t r = 0; r < 3; ++r) m[r] = triple<double>(j[r], where, number);
  return m;
}

json counts_json(const production::UnitCounts& c) {
  json out = json::object();
  for (UnitType t : production::kUnitTypes) out[std::string(1, production::letter(t))] = c[idx(t)];
  return out;
}

// Sum over targets of min(cap, constant + decision terms + stochastic terms).
struct LinearTarget {
  double constant = 0.0;
  std::vector<std::pair<std::size_t, double>> decision;
  std::vector<std::pair<std::size_t, double>> stochastic;
  std::optional<double> cap;
};

}  // namespace

json parse_json(std::string_view input, const std::string& source) {
  try {
    return json::parse(input.begin(), input.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, input.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (input[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    // Drop the library's own "[json.exception...] parse error at ..." prefix.
    if (const auto col = what.find("column"); col != std::string::npos) {
      if (const auto colon = what.find(": ", col); colon != std::string::npos) what = what.substr(colon + 2);
    }
    throw Error(ErrorKind::ParseError, source + ": line " + std::to_string(line) + ", column " +
                                           std::to_string(column) + ": " + what);
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str(), path);
}

Lottery lottery_from_json(const json& j) {
  expect_array(j, "lottery");
  std::vector<Outcome> raw;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = "lottery[" + std::to_string(i) + "]";
    reject_unknown(j[i], {"x", "p"}, at);
    if (!j[i].contains("x") || !j[i].contains("p")) bad(at, "needs \"x\" and \"p\"");
    raw.push_back({number(j[i]["x"], at + ".x"), number(j[i]["p"], at + ".p")});
  }
  return make_lottery(raw);
}

json to_json(const Lottery& lottery) {
  json out = json::array();
  for (const Outcome& o : lottery.outcomes()) out.push_back({{"x", o.consequence}, {"p", o.probability}});
  return out;
}

DiscreteDistribution distribution_from_json(const json& j) {
  reject_unknown(j, {"support"}, "distribution");
  if (!j.contains("support")) bad("distribution", "needs \"support\"");
  return DiscreteDistribution(support_from_json(j["support"], "distribution.support"));
}

json to_json(const DiscreteDistribution& dist) {
  json support = json::array();
  for (const SupportPoint& p : dist.support()) support.push_back({p.value, p.probability});
  return {{"support", support}};
}

Deformation deformation_from_json(const json& j) {
  if (j.is_string()) return Deformation::parse(j.get<std::string>());
  reject_unknown(j, {"kind", "lambda", "shift", "knots"}, "phi");
  const std::string kind = text(j.value("kind", json()), "phi.kind");
  if (kind == "identity") return Deformation::identity();
  if (kind == "logistic") {
    return Deformation::logistic(
        optional_field(j, "lambda", Deformation::kDefaultLambda, number, "phi"),
        optional_field(j, "shift", Deformation::kDefaultShift, number, "phi"));
  }
  if (kind == "logit") {
    return Deformation::logit(optional_field(j, "lambda", Deformation::kDefaultLambda, number, "phi"));
  }
  if (kind == "custom") {
    if (!j.contains("knots")) bad("phi", "custom needs \"knots\"");
    expect_array(j["knots"], "phi.knots");
    std::vector<std::pair<double, double>> knots;
    for (const json& k : j["knots"]) {
      if (!k.is_array() || k.size() != 2) bad("phi.knots", "expected [p, value] pairs");
      knots.emplace_back(number(k[0], "phi.knots"), number(k[1], "phi.knots"));
    }
    return Deformation::custom(std::move(knots));
  }
  bad("phi.kind", "unknown kind '" + kind + "'");
}

json to_json(const Deformation& phi) {
  switch (phi.kind()) {
    case Deformation::Kind::Identity: return {{"kind", "identity"}};
    case Deformation::Kind::LogisticPessimistic:
      return {{"kind", "logistic"}, {"lambda", phi.lambda()}, {"shift", phi.shift()}};
    case Deformation::Kind::LogitOptimistic: return {{"kind", "logit"}, {"lambda", phi.lambda()}};
    case Deformation::Kind::Custom: {
      json knots = json::array();
      for (const auto& [p, v] : phi.knots()) knots.push_back({p, v});
      return {{"kind", "custom"}, {"knots", knots}};
    }
  }
  return {};
}

DistributionGenerator generator_from_json(const json& j) {
  expect_object(j, "generator");
  DistributionGenerator gen;
  for (const auto& [var, rules] : j.items()) {
    const std::string where = "generator." + var;
    expect_array(rules, where);
    if (rules.empty()) bad(where, "needs at least one rule");
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const std::string at = where + "[" + std::to_string(i) + "]";
      const json& r = rules[i];
      reject_unknown(r, {"from", "to", "family", "intercept", "slope", "support"}, at);
      DistributionRule rule;
      rule.from_tick = optional_field(r, "from", 0, integer, at);
      rule.to_tick = optional_field(r, "to", std::numeric_limits<int>::max(), integer, at);
      const std::string family = text(r.value("family", json()), at + ".family");
      if (family == "poisson_linear") {
        rule.family = DistributionRule::Family::PoissonLinear;
      } else if (family == "uniform_linear") {
        rule.family = DistributionRule::Family::UniformLinear;
      } else if (family == "fixed") {
        rule.family = DistributionRule::Family::Fixed;
        if (!r.contains("support")) bad(at, "fixed family needs \"support\"");
        rule.fixed = support_from_json(r["support"], at + ".support");
      } else {
        bad(at + ".family", "unknown family '" + family + "'");
      }
      rule.intercept = optional_field(r, "intercept", 0.0, number, at);
      rule.slope = optional_field(r, "slope", 0.0, number, at);
      gen.add_rule(var, std::move(rule));
    }
  }
  return gen;
}

json to_json(const DistributionGenerator& gen) {
  json out = json::object();
  for (const auto& [var, rules] : gen.rules()) {
    json list = json::array();
    for (const DistributionRule& r : rules) {
      json item = {{"from", r.from_tick}, {"to", r.to_tick}};
      switch (r.family) {
        case DistributionRule::Family::PoissonLinear: item["family"] = "poisson_linear"; break;
        case DistributionRule::Family::UniformLinear: item["family"] = "uniform_linear"; break;
        case DistributionRule::Family::Fixed: {
          item["family"] = "fixed";
          json support = json::array();
          for (const SupportPoint& p : r.fixed) support.push_back({p.value, p.probability});
          item["support"] = support;
          break;
        }
      }
      if (r.family != DistributionRule::Family::Fixed) {
        item["intercept"] = r.intercept;
        item["slope"] = r.slope;
      }
      list.push_back(item);
    }
    out[var] = list;
  }
  return out;
}

SolverConfig solver_config_from_json(const json& j, SolverConfig base) {
  reject_unknown(j, {"budget_ms", "budget_iters", "seed", "tabu", "restart"}, "solver");
  if (j.contains("budget_ms") && j.contains("budget_iters")) {
    bad("solver", "give either budget_ms or budget_iters");
  }
  if (j.contains("budget_ms")) base.budget = Budget::milliseconds(integer(j["budget_ms"], "solver.budget_ms"));
  if (j.contains("budget_iters")) {
    base.budget = Budget::iterations(integer(j["budget_iters"], "solver.budget_iters"));
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("solver.seed", "expected an unsigned integer");
    base.seed = j["seed"].get<std::uint64_t>();
  }
  base.tabu_tenure = optional_field(j, "tabu", base.tabu_tenure, integer, "solver");
  base.restart_interval = optional_field(j, "restart", base.restart_interval, integer, "solver");
  base.validate();
  return base;
}

production::CounterMatrix counter_matrix_from_json(const json& j) {
  reject_unknown(j, {"need", "survivors", "max_reciprocity_error"}, "coeffs");
  if (!j.contains("need")) bad("coeffs", "needs \"need\"");
  production::CounterMatrix m;
  m.need = matrix3(j["need"], "coeffs.need");
  m.validate();
  return m;
}

json to_json(const production::CounterMatrix& m) {
  json need = json::array();
  for (const auto& row : m.need) need.push_back(row);
  return {{"need", need}};
}

production::UnitCounts unit_counts_from_json(const json& j) {
  production::UnitCounts c{};
  if (j.is_array()) return triple<int>(j, "unit counts", integer);
  reject_unknown(j, {"H", "L", "R"}, "unit counts");
  for (UnitType t : production::kUnitTypes) {
    const std::string key(1, production::letter(t));
    c[idx(t)] = optional_field(j, key.c_str(), 0, integer, "unit counts");
  }
  return c;
}

json to_json(const production::ProductionDecision& d) {
  json assign = json::object();
  for (UnitType t : production::kUnitTypes) {
    assign[std::string(1, production::letter(t))] = counts_json(d.assign[idx(t)]);
  }
  return {{"plan", counts_json(d.plan)}, {"assign", assign}};
}

production::ProductionState production_state_from_json(const json& j) {
  reject_unknown(j, {"our_units", "stock", "observed_enemy", "tick"}, "state");
  production::ProductionState s;
  if (j.contains("our_units")) s.our_units = unit_counts_from_json(j["our_units"]);
  if (j.contains("observed_enemy")) s.observed_enemy = unit_counts_from_json(j["observed_enemy"]);
  s.stock = optional_field(j, "stock", 0, integer, "state");
  s.tick = optional_field(j, "tick", 0, integer, "state");
  return s;
}

namespace {

LoadedInstance production_instance(const json& root) {
  const json& p = root["production"];
  reject_unknown(p, {"state", "coeffs", "mode", "threshold", "enemy", "generator"}, "production");
  if (!p.contains("state")) bad("production", "needs \"state\"");
  const production::ProductionState state = production_state_from_json(p["state"]);

  production::ModelOptions options;
  if (root.contains("phi")) options.phi = deformation_from_json(root["phi"]);
  options.k = optional_field(root, "k", kDefaultSampleCount, integer, "instance");
  options.threshold = optional_field(p, "threshold", production::kDefaultThreshold, integer, "production");
  if (p.contains("mode")) options.mode = production::parse_coefficient_mode(text(p["mode"], "production.mode"));
  const production::CounterMatrix coeffs =
      p.contains("coeffs") ? counter_matrix_from_json(p["coeffs"]) : production::default_coeffs();

  if (p.contains("enemy") == p.contains("generator")) {
    bad("production", "give exactly one of \"enemy\" or \"generator\"");
  }
  production::EnemyDistributions priors{DiscreteDistribution::point_mass(0),
                                        DiscreteDistribution::point_mass(0),
                                        DiscreteDistribution::point_mass(0)};
  if (p.contains("enemy")) {
    const json& e = p["enemy"];
    reject_unknown(e, {"H", "L", "R"}, "production.enemy");
    for (UnitType t : production::kUnitTypes) {
      const std::string key(1, production::letter(t));
      if (!e.contains(key)) bad("production.enemy", "missing \"" + key + "\"");
      priors[idx(t)] = distribution_from_json(e[key]);
    }
  } else {
    const DistributionGenerator gen = generator_from_json(p["generator"]);
    for (UnitType t : production::kUnitTypes) {
      priors[idx(t)] = gen.at(production::stochastic_var_name(t), state.tick, options.threshold);
    }
  }

  LoadedInstance out{production::build_instance(state, coeffs, priors, options), std::nullopt, state};
  if (root.contains("solver")) out.solver = solver_config_from_json(root["solver"]);
  return out;
}

}  // namespace

LoadedInstance instance_from_json(const json& j) {
  try {
    if (j.is_object() && j.contains("production")) {
      reject_unknown(j, {"production", "phi", "k", "solver"}, "instance");
      return production_instance(j);
    }
    reject_unknown(j, {"decision_vars", "stochastic_vars", "constraints", "objective", "phi", "k", "solver"},
                   "instance");

    std::vector<DecisionVar> vars;
    const json& dv = j.value("decision_vars", json::array());
    expect_array(dv, "decision_vars");
    for (std::size_t i = 0; i < dv.size(); ++i) {
      const std::string at = "decision_vars[" + std::to_string(i) + "]";
      reject_unknown(dv[i], {"name", "lo", "hi"}, at);
      vars.push_back({text(dv[i].value("name", json()), at + ".name"),
                      integer(dv[i].value("lo", json()), at + ".lo"),
                      integer(dv[i].value("hi", json()), at + ".hi")});
      if (vars.back().lo > vars.back().hi) bad(at, "lo must be <= hi");
    }

    std::vector<StochasticVar> stochastic;
    const json& sv = j.value("stochastic_vars", json::array());
    expect_array(sv, "stochastic_vars");
    for (std::size_t i = 0; i < sv.size(); ++i) {
      const std::string at = "stochastic_vars[" + std::to_string(i) + "]";
      reject_unknown(sv[i], {"name", "support"}, at);
      if (!sv[i].contains("support")) bad(at, "needs \"support\"");
      stochastic.push_back({text(sv[i].value("name", json()), at + ".name"),
                            DiscreteDistribution(support_from_json(sv[i]["support"], at + ".support"))});
    }

    std::vector<Constraint> constraints;
    const json& cs = j.value("constraints", json::array());
    expect_array(cs, "constraints");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string at = "constraints[" + std::to_string(i) + "]";
      reject_unknown(cs[i], {"kind", "terms", "constant"}, at);
      Constraint c;
      const std::string kind = text(cs[i].value("kind", json()), at + ".kind");
      if (kind == "eq") {
        c.kind = Constraint::Kind::LinearEq;
      } else if (kind == "le") {
        c.kind = Constraint::Kind::LinearLe;
      } else {
        bad(at + ".kind", "expected \"eq\" or \"le\"");
      }
      const json& terms = cs[i].value("terms", json::array());
      expect_array(terms, at + ".terms");
      for (const json& t : terms) {
        if (!t.is_array() || t.size() != 2) bad(at + ".terms", "expected [coefficient, name] pairs");
        c.terms.push_back({number(t[0], at + ".terms"), text(t[1], at + ".terms")});
      }
      c.constant = optional_field(cs[i], "constant", 0.0, number, at);
      constraints.push_back(std::move(c));
    }

    if (!j.contains("objective")) bad("instance", "needs \"objective\"");
    const json& obj = j["objective"];
    reject_unknown(obj, {"sense", "targets"}, "objective");
    Sense sense = Sense::Maximize;
    const std::string sense_text = optional_field(obj, "sense", std::string("max"), text, "objective");
    if (sense_text == "min") {
      sense = Sense::Minimize;
    } else if (sense_text != "max") {
      bad("objective.sense", "expected \"max\" or \"min\"");
    }
    const auto find_index = [](const auto& list, const std::string& name, const std::string& at) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (list[i].name == name) return i;
      }
      throw Error(ErrorKind::UnknownVariable, at + ": unknown variable '" + name + "'");
    };
    std::vector<LinearTarget> targets;
    const json& ts = obj.value("targets", json::array());
    expect_array(ts, "objective.targets");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::string at = "objective.targets[" + std::to_string(i) + "]";
      reject_unknown(ts[i], {"constant", "decision", "stochastic", "cap"}, at);
      LinearTarget t;
      t.constant = optional_field(ts[i], "constant", 0.0, number, at);
      if (ts[i].contains("cap")) t.cap = number(ts[i]["cap"], at + ".cap");
      const json decision = ts[i].value("decision", json::object());
      const json stoch = ts[i].value("stochastic", json::object());
      for (const auto& [name, coef] : decision.items()) {
        t.decision.emplace_back(find_index(vars, name, at), number(coef, at + ".decision"));
      }
      for (const auto& [name, coef] : stoch.items()) {
        t.stochastic.emplace_back(find_index(stochastic, name, at), number(coef, at + ".stochastic"));
      }
      targets.push_back(std::move(t));
    }
    StochasticObjective objective{
        [targets](std::span<const int> d, std::span<const int> s) {
          double total = 0.0;
          for (const LinearTarget& t : targets) {
            double v = t.constant;
            for (const auto& [i, c] : t.decision) v += c * d[i];
            for (const auto& [i, c] : t.stochastic) v += c * s[i];
            total += t.cap ? std::min(*t.cap, v) : v;
          }
          return total;
        },
        sense};

    const Deformation phi = j.contains("phi") ? deformation_from_json(j["phi"]) : Deformation::identity();
    const int k = optional_field(j, "k", kDefaultSampleCount, integer, "instance");
    LoadedInstance out{CopInstance(std::move(vars), std::move(stochastic), std::move(constraints),
                                   std::move(objective), phi, k),
                       std::nullopt, std::nullopt};
    if (j.contains("solver")) out.solver = solver_config_from_json(j["solver"]);
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("instance: ") + e.what());
  }
}

json decision_to_json(const CopInstance& inst, std::span<const int> d) {
  json out = json::object();
  for (std::size_t i = 0; i < d.size(); ++i) out[inst.decision_vars()[i].name] = d[i];
  return out;
}

arena::UnitStats unit_stats_from_json(const json& j) {
  reject_unknown(j, {"hit_points", "damage", "multiplier", "hit_chance"}, "stats");
  arena::UnitStats s = arena::default_unit_stats();
  if (j.contains("hit_points")) s.hit_points = triple<int>(j["hit_points"], "stats.hit_points", integer);
  if (j.contains("damage")) s.damage = triple<double>(j["damage"], "stats.damage", number);
  if (j.contains("multiplier")) s.multiplier = matrix3(j["multiplier"], "stats.multiplier");
  s.hit_chance = optional_field(j, "hit_chance", s.hit_chance, number, "stats");
  s.validate();
  return s;
}

json to_json(const arena::UnitStats& stats) {
  json multiplier = json::array();
  for (const auto& row : stats.multiplier) multiplier.push_back(row);
  return {{"hit_points", stats.hit_points},
          {"damage", stats.damage},
          {"multiplier", multiplier},
          {"hit_chance", stats.hit_chance}};
}

arena::Scenario scenario_from_json(const json& j) {
  reject_unknown(j,
                 {"player", "max_ticks", "observation_prob", "decision_epoch", "build_ticks", "stats",
                  "coeffs", "mode", "threshold", "k", "solver", "enemy_prior"},
                 "scenario");
  arena::Scenario s = arena::default_scenario();
  if (j.contains("player")) {
    const json& p = j["player"];
    reject_unknown(p, {"stock", "income_per_tick", "units", "base_hit_points"}, "scenario.player");
    s.player.stock = optional_field(p, "stock", s.player.stock, number, "scenario.player");
    s.player.income_per_tick =
        optional_field(p, "income_per_tick", s.player.income_per_tick, number, "scenario.player");
    if (p.contains("units")) s.player.units = unit_counts_from_json(p["units"]);
    s.player.base_hit_points =
        optional_field(p, "base_hit_points", s.player.base_hit_points, integer, "scenario.player");
  }
  s.max_ticks = optional_field(j, "max_ticks", s.max_ticks, integer, "scenario");
  s.observation_prob = optional_field(j, "observation_prob", s.observation_prob, number, "scenario");
  s.decision_epoch = optional_field(j, "decision_epoch", s.decision_epoch, integer, "scenario");
  if (j.contains("build_ticks")) s.build_ticks = unit_counts_from_json(j["build_ticks"]);
  if (j.contains("stats")) s.stats = unit_stats_from_json(j["stats"]);
  if (j.contains("coeffs")) s.coeffs = counter_matrix_from_json(j["coeffs"]);
  if (j.contains("mode")) s.mode = production::parse_coefficient_mode(text(j["mode"], "scenario.mode"));
  s.threshold = optional_field(j, "threshold", s.threshold, integer, "scenario");
  s.k = optional_field(j, "k", s.k, integer, "scenario");
  if (j.contains("solver")) s.solver = solver_config_from_json(j["solver"], s.solver);
  if (j.contains("enemy_prior")) s.enemy_prior = generator_from_json(j["enemy_prior"]);
  s.validate();
  return s;
}

json summary_to_json(const arena::MatchResult& result) {
  const auto row = [](const std::string& bot, const arena::Tally& t) {
    return json{{"bot", bot},          {"wins", t.wins},   {"ties", t.ties},
                {"losses", t.losses},  {"score", t.score()}, {"normalized_score", t.normalized_score()}};
  };
  return {{"games", result.games.size()},
          {"rows", json::array({row(result.bot_a, result.a), row(result.bot_b, result.b)})}};
}

}  // namespace rdu::io
