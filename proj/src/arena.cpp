#include "rdu/arena.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "rdu/error.hpp"

namespace rdu::arena {

using production::idx;
using production::kUnitCost;
using production::kUnitTypes;

namespace {

enum StreamPurpose : std::uint64_t { kObserve = 1, kDecide = 2, kCombat = 3 };

}  // namespace

void UnitStats::validate() const {
  for (std::size_t t = 0; t < kNumTypes; ++t) {
    if (hit_points[t] <= 0 || !(damage[t] > 0.0)) {
      throw Error(ErrorKind::InvalidConfig, "hit points and damage must be > 0");
    }
    for (double m : multiplier[t]) {
      if (!(m > 0.0) || !std::isfinite(m)) {
        throw Error(ErrorKind::InvalidConfig, "type multipliers must be finite and > 0");
      }
    }
  }
  if (!(hit_chance > 0.0 && hit_chance <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "hit_chance must be in (0, 1]");
  }
  const auto m = [&](UnitType a, UnitType b) { return multiplier[idx(a)][idx(b)]; };
  if (!(m(UnitType::Heavy, UnitType::Light) > m(UnitType::Light, UnitType::Heavy)) ||
      !(m(UnitType::Light, UnitType::Ranged) > m(UnitType::Ranged, UnitType::Light)) ||
      !(m(UnitType::Ranged, UnitType::Heavy) > m(UnitType::Heavy, UnitType::Ranged))) {
    throw Error(ErrorKind::InvalidConfig,
                "multipliers must make heavy beat light, light beat ranged, ranged beat heavy");
  }
}

UnitStats default_unit_stats() {
  UnitStats s;
  s.hit_points = {7, 5, 5};
  s.damage = {2.0, 2.0, 2.0};
  s.multiplier = {{
      {1.0, 1.4, 0.7},
      {0.7, 1.0, 1.4},
      {1.4, 0.7, 1.0},
  }};
  s.hit_chance = 0.1;
  return s;
}

namespace {

// Damage side `from` deals to each defender type of `to`.
std::array<double, kNumTypes> outgoing_damage(const Army& from, const Army& to,
                                              const UnitStats& stats, RngStream& rng,
                                              CombatMode mode) {
  std::array<double, kNumTypes> dealt{};
  const double defenders = to.total();
  if (defenders == 0) return dealt;
  for (UnitType x : kUnitTypes) {
    const int count = from.units[idx(x)];
    if (count == 0) continue;
    const double hits = mode == CombatMode::Stochastic
                            ? rng.binomial(count, stats.hit_chance)
                            : count * stats.hit_chance;
    for (UnitType y : kUnitTypes) {
      const double share = to.units[idx(y)] / defenders;
      dealt[idx(y)] += hits * stats.damage[idx(x)] * stats.multiplier[idx(x)][idx(y)] * share;
    }
  }
  return dealt;
}

void absorb(Army& army, const std::array<double, kNumTypes>& damage, const UnitStats& stats) {
  for (UnitType y : kUnitTypes) {
    int& count = army.units[idx(y)];
    double& pool = army.pending_damage[idx(y)];
    pool += damage[idx(y)];
    const int hp = stats.hit_points[idx(y)];
    const int casualties = std::min(count, static_cast<int>(std::floor(pool / hp)));
    count -= casualties;
    pool -= static_cast<double>(casualties) * hp;
    if (count == 0) pool = 0.0;
  }
}

double base_damage(const Army& army, const UnitStats& stats, RngStream& rng) {
  double dealt = 0.0;
  for (UnitType x : kUnitTypes) {
    const int count = army.units[idx(x)];
    if (count > 0) dealt += rng.binomial(count, stats.hit_chance) * stats.damage[idx(x)];
  }
  return dealt;
}

}  // namespace

void resolve_combat_step(Army& a, Army& b, const UnitStats& stats, RngStream& rng_a,
                         RngStream& rng_b, CombatMode mode) {
  if (a.empty() || b.empty()) return;
  const auto to_b = outgoing_damage(a, b, stats, rng_a, mode);
  const auto to_a = outgoing_damage(b, a, stats, rng_b, mode);
  absorb(a, to_a, stats);
  absorb(b, to_b, stats);
}

DuelResult duel(UnitType a, UnitType b, int army_size, const UnitStats& stats, RngStream& rng,
                CombatMode mode, int step_cap) {
  Army first;
  Army second;
  first.units[idx(a)] = army_size;
  second.units[idx(b)] = army_size;
  DuelResult result;
  while (!first.empty() && !second.empty() && result.steps < step_cap) {
    resolve_combat_step(first, second, stats, rng, mode);
    ++result.steps;
  }
  result.survivors_a = first.total();
  result.survivors_b = second.total();
  return result;
}

CoefficientEstimate estimate_coefficients_detailed(const UnitStats& stats, int games,
                                                   int army_size, RngStream& rng) {
  if (games < 1) throw Error(ErrorKind::InvalidConfig, "games must be >= 1");
  if (army_size < 1) throw Error(ErrorKind::InvalidConfig, "army size must be >= 1");
  stats.validate();

  CoefficientEstimate estimate;
  for (std::size_t a = 0; a < kNumTypes; ++a) {
    estimate.matrix.need[a][a] = 1.0;
    for (std::size_t b = a + 1; b < kNumTypes; ++b) {
      long total_a = 0;
      long total_b = 0;
      for (int g = 0; g < games; ++g) {
        const DuelResult r = duel(kUnitTypes[a], kUnitTypes[b], army_size, stats, rng);
        total_a += r.survivors_a;
        total_b += r.survivors_b;
      }
      estimate.survivors[a][b] = total_a;
      estimate.survivors[b][a] = total_b;
      const double floored_a = std::max(1.0, static_cast<double>(total_a));
      const double floored_b = std::max(1.0, static_cast<double>(total_b));
      estimate.matrix.need[a][b] = floored_b / floored_a;
      estimate.matrix.need[b][a] = floored_a / floored_b;
    }
  }
  return estimate;
}

BotPolicy BotPolicy::make(BotKind kind) {
  BotPolicy bot;
  bot.kind = kind;
  switch (kind) {
    case BotKind::ExpectedUtility: bot.phi = Deformation::identity(); break;
    case BotKind::RduPessimistic: bot.phi = Deformation::logistic(10.0, 1.3); break;
    case BotKind::RduOptimistic: bot.phi = Deformation::logit(10.0); break;
    default: break;
  }
  return bot;
}

BotPolicy BotPolicy::with_phi(const Deformation& phi) {
  BotPolicy bot;
  bot.kind = BotKind::RduCustom;
  bot.phi = phi;
  return bot;
}

BotPolicy BotPolicy::parse(const std::string& text) {
  if (text == "random") return make(BotKind::RandomBaseline);
  if (text == "eu") return make(BotKind::ExpectedUtility);
  if (text == "rdu-pess") return make(BotKind::RduPessimistic);
  if (text == "rdu-opt") return make(BotKind::RduOptimistic);
  if (text == "rush") return make(BotKind::LightRush);
  try {
    return with_phi(Deformation::parse(text));
  } catch (const Error&) {
    throw Error(ErrorKind::InvalidConfig, "unknown bot kind '" + text + "'");
  }
}

std::string BotPolicy::label() const {
  switch (kind) {
    case BotKind::RandomBaseline: return "random";
    case BotKind::ExpectedUtility: return "eu";
    case BotKind::RduPessimistic: return "rdu-pess";
    case BotKind::RduOptimistic: return "rdu-opt";
    case BotKind::LightRush: return "rush";
    case BotKind::RduCustom: return phi.describe();
  }
  return "?";
}

void Scenario::validate() const {
  if (max_ticks < 0) throw Error(ErrorKind::InvalidConfig, "max_ticks must be >= 0");
  if (!(observation_prob >= 0.0 && observation_prob <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "observation_prob must be in [0, 1]");
  }
  if (decision_epoch < 1) throw Error(ErrorKind::InvalidConfig, "decision_epoch must be >= 1");
  for (int t : build_ticks) {
    if (t < 1) throw Error(ErrorKind::InvalidConfig, "build ticks must be >= 1");
  }
  for (int u : player.units) {
    if (u < 0) throw Error(ErrorKind::InvalidConfig, "starting units must be >= 0");
  }
  if (player.stock < 0.0 || player.income_per_tick < 0.0 || player.base_hit_points < 0) {
    throw Error(ErrorKind::InvalidConfig, "stock, income and base hit points must be >= 0");
  }
  if (threshold < 0 || k < 1) throw Error(ErrorKind::InvalidConfig, "threshold >= 0 and k >= 1");
  stats.validate();
  coeffs.validate();
  solver.validate();
  for (UnitType t : kUnitTypes) {
    if (!enemy_prior.has(production::stochastic_var_name(t))) {
      throw Error(ErrorKind::InvalidConfig,
                  "enemy prior lacks " + production::stochastic_var_name(t));
    }
  }
}

DistributionGenerator default_enemy_prior() {
  // A rush-heavy population: light armies grow fastest.
  DistributionGenerator prior;
  const auto rule = [](double intercept, double slope) {
    DistributionRule r;
    r.from_tick = 0;
    r.to_tick = 1 << 30;
    r.family = DistributionRule::Family::PoissonLinear;
    r.intercept = intercept;
    r.slope = slope;
    return r;
  };
  prior.add_rule(production::stochastic_var_name(UnitType::Heavy), rule(0.2, 0.01));
  prior.add_rule(production::stochastic_var_name(UnitType::Light), rule(1.0, 0.12));
  prior.add_rule(production::stochastic_var_name(UnitType::Ranged), rule(0.2, 0.01));
  return prior;
}

Scenario default_scenario() {
  Scenario s;
  s.enemy_prior = default_enemy_prior();
  return s;
}

bool PlayerState::can_produce() const {
  const int cheapest = *std::min_element(kUnitCost.begin(), kUnitCost.end());
  return base_alive() &&
         (income_per_tick > 0.0 || !production_queue.empty() || stock >= cheapest);
}

UnitCounts PlayerState::committed_units() const {
  UnitCounts counts = army.units;
  for (const QueuedUnit& q : production_queue) ++counts[idx(q.type)];
  return counts;
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::WinA: return "WinA";
    case Outcome::WinB: return "WinB";
    case Outcome::Tie: return "Tie";
  }
  return "?";
}

Outcome swapped(Outcome outcome) {
  if (outcome == Outcome::WinA) return Outcome::WinB;
  if (outcome == Outcome::WinB) return Outcome::WinA;
  return Outcome::Tie;
}

SideSeeds derive_side_seeds(std::uint64_t seed) {
  return {mix64(seed ^ 0xA5A5A5A5A5A5A5A5ULL), mix64(seed ^ 0x5A5A5A5A5A5A5A5AULL)};
}

namespace {

std::vector<UnitType> adaptive_production(const BotPolicy& bot, const Scenario& scenario,
                                          const PlayerState& self, const UnitCounts& observed,
                                          int tick, RngStream& rng) {
  production::ProductionState state;
  state.our_units = self.committed_units();
  state.stock = static_cast<int>(std::floor(self.stock));
  state.observed_enemy = observed;
  state.tick = tick;

  production::ModelOptions options;
  options.phi = bot.phi;
  options.k = scenario.k;
  options.mode = scenario.mode;
  options.threshold = std::max({scenario.threshold, state.our_units[0], state.our_units[1],
                                state.our_units[2]});

  production::EnemyDistributions priors = {
      scenario.enemy_prior.at(production::stochastic_var_name(UnitType::Heavy), tick,
                              options.threshold),
      scenario.enemy_prior.at(production::stochastic_var_name(UnitType::Light), tick,
                              options.threshold),
      scenario.enemy_prior.at(production::stochastic_var_name(UnitType::Ranged), tick,
                              options.threshold),
  };
  const CopInstance inst = production::build_instance(state, scenario.coeffs, priors, options);
  const SampleBatch batch = draw_batch(inst, rng);
  SolverConfig cfg = scenario.solver;
  cfg.seed = rng.next_u64();
  const SolveResult result = solve(inst, cfg, batch);

  std::vector<UnitType> orders;
  if (!result.feasible_found) return orders;
  const production::ProductionDecision plan = production::decode(result.best_decision);
  UnitCounts missing{};
  for (UnitType t : kUnitTypes) {
    missing[idx(t)] = std::max(0, plan.plan[idx(t)] - state.our_units[idx(t)]);
  }
  // Interleave types so the build queue does not delay one type entirely.
  for (bool any = true; any;) {
    any = false;
    for (UnitType t : kUnitTypes) {
      if (missing[idx(t)] > 0) {
        orders.push_back(t);
        --missing[idx(t)];
        any = true;
      }
    }
  }
  return orders;
}

}  // namespace

std::vector<UnitType> choose_production(const BotPolicy& bot, const Scenario& scenario,
                                        const PlayerState& self, const UnitCounts& observed,
                                        int tick, RngStream& rng) {
  std::vector<UnitType> orders;
  double stock = self.stock;
  switch (bot.kind) {
    case BotKind::LightRush:
      while (stock >= kUnitCost[idx(UnitType::Light)]) {
        orders.push_back(UnitType::Light);
        stock -= kUnitCost[idx(UnitType::Light)];
      }
      return orders;
    case BotKind::RandomBaseline:
      for (;;) {
        const UnitType pick = kUnitTypes[static_cast<std::size_t>(rng.uniform_int(0, 2))];
        if (stock < kUnitCost[idx(pick)]) break;
        orders.push_back(pick);
        stock -= kUnitCost[idx(pick)];
      }
      return orders;
    default:
      return adaptive_production(bot, scenario, self, observed, tick, rng);
  }
}

GameRecord play_game(const BotPolicy& a, const BotPolicy& b, const Scenario& scenario,
                     SideSeeds seeds) {
  scenario.validate();
  const std::array<const BotPolicy*, 2> bots = {&a, &b};
  const RngStream root_a(seeds.a);
  const RngStream root_b(seeds.b);
  std::array<RngStream, 2> observe = {root_a.split(kObserve), root_b.split(kObserve)};
  std::array<RngStream, 2> decide = {root_a.split(kDecide), root_b.split(kDecide)};
  std::array<RngStream, 2> combat = {root_a.split(kCombat), root_b.split(kCombat)};

  GameState game;
  game.max_ticks = scenario.max_ticks;
  game.observation_prob = scenario.observation_prob;
  for (PlayerState& p : game.players) {
    p.stock = scenario.player.stock;
    p.income_per_tick = scenario.player.income_per_tick;
    p.army.units = scenario.player.units;
    p.base_hit_points = scenario.player.base_hit_points;
  }

  const auto finish = [&](Outcome outcome) {
    return GameRecord{outcome, game.tick, game.players[0].army.total(),
                      game.players[1].army.total()};
  };

  for (game.tick = 0; game.tick < game.max_ticks; ++game.tick) {
    for (PlayerState& p : game.players) {
      if (!p.base_alive()) continue;
      p.stock += p.income_per_tick;
      if (!p.production_queue.empty() && --p.production_queue.front().ticks_remaining <= 0) {
        ++p.army.units[idx(p.production_queue.front().type)];
        p.production_queue.erase(p.production_queue.begin());
      }
    }

    if (game.tick % scenario.decision_epoch == 0) {
      // Both sides observe the same snapshot before either acts.
      std::array<UnitCounts, 2> seen{};
      for (std::size_t s = 0; s < 2; ++s) {
        const Army& enemy = game.players[1 - s].army;
        for (UnitType t : kUnitTypes) {
          seen[s][idx(t)] = observe[s].binomial(enemy.units[idx(t)], game.observation_prob);
        }
      }
      for (std::size_t s = 0; s < 2; ++s) {
        PlayerState& p = game.players[s];
        if (!p.base_alive()) continue;
        for (UnitType t : choose_production(*bots[s], scenario, p, seen[s], game.tick, decide[s])) {
          if (p.stock < kUnitCost[idx(t)]) break;
          p.stock -= kUnitCost[idx(t)];
          p.production_queue.push_back({t, scenario.build_ticks[idx(t)]});
        }
      }
    }

    Army& army_a = game.players[0].army;
    Army& army_b = game.players[1].army;
    if (!army_a.empty() && !army_b.empty()) {
      resolve_combat_step(army_a, army_b, scenario.stats, combat[0], combat[1]);
    } else {
      std::array<double, 2> siege{};
      for (std::size_t s = 0; s < 2; ++s) {
        if (!game.players[s].army.empty() && game.players[1 - s].base_alive()) {
          siege[1 - s] = base_damage(game.players[s].army, scenario.stats, combat[s]);
        }
      }
      for (std::size_t s = 0; s < 2; ++s) {
        PlayerState& p = game.players[s];
        if (siege[s] <= 0.0 || !p.base_alive()) continue;
        p.base_hit_points = std::max(0, p.base_hit_points - static_cast<int>(std::floor(siege[s])));
        if (!p.base_alive()) {
          p.stock = 0.0;
          p.income_per_tick = 0.0;
          p.production_queue.clear();
        }
      }
    }

    const bool a_out = game.players[0].defeated();
    const bool b_out = game.players[1].defeated();
    if (a_out || b_out) {
      ++game.tick;
      if (a_out && b_out) return finish(Outcome::Tie);
      return finish(a_out ? Outcome::WinB : Outcome::WinA);
    }
  }
  return finish(Outcome::Tie);
}

std::uint64_t game_seed(std::uint64_t base_seed, int index) {
  return mix64(mix64(base_seed) + static_cast<std::uint64_t>(index));
}

MatchResult run_match(const BotPolicy& a, const BotPolicy& b, const Scenario& scenario,
                      int n_games, std::uint64_t base_seed, int parallelism) {
  if (n_games < 1) throw Error(ErrorKind::InvalidConfig, "a match needs at least one game");
  scenario.validate();

  MatchResult result;
  result.bot_a = a.label();
  result.bot_b = b.label();
  result.games.resize(static_cast<std::size_t>(n_games));

  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < n_games; i = next++) {
      MatchGame& g = result.games[static_cast<std::size_t>(i)];
      g.index = i;
      g.seed = game_seed(base_seed, i);
      g.a_in_first_slot = i % 2 == 0;
      if (g.a_in_first_slot) {
        g.record = play_game(a, b, scenario, g.seed);
      } else {
        GameRecord r = play_game(b, a, scenario, g.seed);
        g.record = {swapped(r.outcome), r.ticks, r.final_units_b, r.final_units_a};
      }
    }
  };

  int threads = parallelism > 0 ? parallelism
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n_games);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (const MatchGame& g : result.games) {
    switch (g.record.outcome) {
      case Outcome::WinA: ++result.a.wins; ++result.b.losses; break;
      case Outcome::WinB: ++result.b.wins; ++result.a.losses; break;
      case Outcome::Tie: ++result.a.ties; ++result.b.ties; break;
    }
  }
  return result;
}

void write_match_csv(std::ostream& out, const MatchResult& result) {
  out << "game_index,seed,side_assignment,outcome,ticks,final_units_A,final_units_B\n";
  for (const MatchGame& g : result.games) {
    out << g.index << ',' << g.seed << ',' << (g.a_in_first_slot ? "A-first" : "B-first") << ','
        << to_string(g.record.outcome) << ',' << g.record.ticks << ',' << g.record.final_units_a
        << ',' << g.record.final_units_b << '\n';
  }
}

}  // namespace rdu::arena
