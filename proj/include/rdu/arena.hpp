#pragma once

// Desk-scale RTS arena: abstract army pools with rock-paper-scissors combat,
// per-unit fog of war, scripted and model-driven production bots.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rdu/production.hpp"
#include "rdu/solver.hpp"
#include "rdu/stochastic.hpp"

namespace rdu::arena {

using production::CounterMatrix;
using production::kNumTypes;
using production::UnitCounts;
using production::UnitType;

struct UnitStats {
  std::array<int, kNumTypes> hit_points{};
  std::array<double, kNumTypes> damage{};
  // multiplier[attacker][defender]
  std::array<std::array<double, kNumTypes>, kNumTypes> multiplier{};
  // Probability that one unit's attack lands in a stochastic combat step.
  double hit_chance = 0.1;

  // Throws InvalidConfig unless values are positive and the multipliers
  // encode heavy > light > ranged > heavy.
  void validate() const;
};

UnitStats default_unit_stats();

struct Army {
  UnitCounts units{};
  // Damage absorbed by each type that has not yet killed a unit.
  std::array<double, kNumTypes> pending_damage{};

  int total() const { return units[0] + units[1] + units[2]; }
  bool empty() const { return total() == 0; }
};

enum class CombatMode { Stochastic, Deterministic };

// One simultaneous exchange. Each attacker type splits its fire over the
// defender types in proportion to their counts; damage goes into a per-type
// pool and every full hit_points worth removes one unit. In stochastic mode
// each unit lands with probability hit_chance (rolled on its own side's
// stream); deterministic mode uses the expected number of hits.
void resolve_combat_step(Army& a, Army& b, const UnitStats& stats, RngStream& rng_a,
                         RngStream& rng_b, CombatMode mode = CombatMode::Stochastic);

inline void resolve_combat_step(Army& a, Army& b, const UnitStats& stats, RngStream& rng,
                                CombatMode mode = CombatMode::Stochastic) {
  resolve_combat_step(a, b, stats, rng, rng, mode);
}

struct DuelResult {
  int survivors_a = 0;
  int survivors_b = 0;
  int steps = 0;
};

inline constexpr int kDuelStepCap = 15;

// army_size of a versus army_size of b until one side is gone or the cap.
DuelResult duel(UnitType a, UnitType b, int army_size, const UnitStats& stats, RngStream& rng,
                CombatMode mode = CombatMode::Stochastic, int step_cap = kDuelStepCap);

inline constexpr int kDefaultDuelGames = 200;
inline constexpr int kDefaultArmySize = 10;

struct CoefficientEstimate {
  CounterMatrix matrix;
  // survivors[a][b]: total surviving units of type a over the duels a vs b.
  std::array<std::array<long, kNumTypes>, kNumTypes> survivors{};
};

// For each unordered pair {A, B} runs `games` duels and sets
// need[A][B] = total surviving B / total surviving A (and the reciprocal for
// need[B][A]). A zero total is floored at one unit over all games.
CoefficientEstimate estimate_coefficients_detailed(const UnitStats& stats, int games,
                                                   int army_size, RngStream& rng);

inline CounterMatrix estimate_coefficients(const UnitStats& stats, RngStream& rng,
                                           int games = kDefaultDuelGames,
                                           int army_size = kDefaultArmySize) {
  return estimate_coefficients_detailed(stats, games, army_size, rng).matrix;
}

enum class BotKind {
  RandomBaseline,
  ExpectedUtility,
  RduPessimistic,
  RduOptimistic,
  RduCustom,
  LightRush,
};

struct BotPolicy {
  BotKind kind = BotKind::RandomBaseline;
  Deformation phi;

  static BotPolicy make(BotKind kind);
  static BotPolicy with_phi(const Deformation& phi);
  // Accepts random, eu, rdu-pess, rdu-opt, rush, or a deformation spec.
  static BotPolicy parse(const std::string& text);

  bool adaptive() const {
    return kind != BotKind::RandomBaseline && kind != BotKind::LightRush;
  }
  std::string label() const;
};

struct PlayerSetup {
  double stock = 6.0;
  double income_per_tick = 0.25;
  UnitCounts units{};
  int base_hit_points = 40;
};

struct Scenario {
  PlayerSetup player;  // both sides start identically
  int max_ticks = 400;
  double observation_prob = 0.5;
  int decision_epoch = 10;
  std::array<int, kNumTypes> build_ticks = {6, 4, 4};
  UnitStats stats = default_unit_stats();
  CounterMatrix coeffs = production::default_coeffs();
  production::CoefficientMode mode = production::CoefficientMode::CounterPower;
  int threshold = production::kDefaultThreshold;
  int k = kDefaultSampleCount;
  SolverConfig solver{Budget::iterations(1000), 200, 4, 0};
  DistributionGenerator enemy_prior;

  void validate() const;
};

// Poisson priors on enemy counts that grow linearly with the tick.
DistributionGenerator default_enemy_prior();
Scenario default_scenario();

struct QueuedUnit {
  UnitType type = UnitType::Light;
  int ticks_remaining = 0;
};

struct PlayerState {
  double stock = 0.0;
  double income_per_tick = 0.0;
  Army army;
  std::vector<QueuedUnit> production_queue;  // front is being built
  int base_hit_points = 0;

  bool base_alive() const { return base_hit_points > 0; }
  // Base standing with income, a queued unit, or enough stock for one unit.
  bool can_produce() const;
  bool defeated() const { return army.empty() && !can_produce(); }
  UnitCounts committed_units() const;
};

struct GameState {
  std::array<PlayerState, 2> players;
  int tick = 0;
  int max_ticks = 0;
  double observation_prob = 0.0;
};

enum class Outcome { WinA, WinB, Tie };
std::string_view to_string(Outcome outcome);
Outcome swapped(Outcome outcome);

struct GameRecord {
  Outcome outcome = Outcome::Tie;
  int ticks = 0;
  int final_units_a = 0;
  int final_units_b = 0;

  friend bool operator==(const GameRecord&, const GameRecord&) = default;
};

// Every random draw of side A comes from stream `a` and likewise for B, so
// play_game(b, a, s, {seeds.b, seeds.a}) mirrors play_game(a, b, s, seeds).
struct SideSeeds {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

SideSeeds derive_side_seeds(std::uint64_t seed);

GameRecord play_game(const BotPolicy& a, const BotPolicy& b, const Scenario& scenario,
                     SideSeeds seeds);
inline GameRecord play_game(const BotPolicy& a, const BotPolicy& b, const Scenario& scenario,
                            std::uint64_t seed) {
  return play_game(a, b, scenario, derive_side_seeds(seed));
}

// Units a bot orders given what it sees; exposed for testing.
std::vector<UnitType> choose_production(const BotPolicy& bot, const Scenario& scenario,
                                        const PlayerState& self, const UnitCounts& observed,
                                        int tick, RngStream& rng);

struct Tally {
  int wins = 0;
  int ties = 0;
  int losses = 0;

  int games() const { return wins + ties + losses; }
  double score() const { return wins + 0.5 * ties; }
  double normalized_score() const { return games() ? score() / games() : 0.0; }

  friend bool operator==(const Tally&, const Tally&) = default;
};

struct MatchGame {
  int index = 0;
  std::uint64_t seed = 0;
  bool a_in_first_slot = true;
  GameRecord record;  // from bot A's point of view

  friend bool operator==(const MatchGame&, const MatchGame&) = default;
};

struct MatchResult {
  std::string bot_a;
  std::string bot_b;
  Tally a;
  Tally b;
  std::vector<MatchGame> games;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

std::uint64_t game_seed(std::uint64_t base_seed, int index);

// Games are independent; odd indices put bot A in the second slot.
// parallelism 0 means one worker per hardware thread.
MatchResult run_match(const BotPolicy& a, const BotPolicy& b, const Scenario& scenario,
                      int n_games, std::uint64_t base_seed, int parallelism = 1);

void write_match_csv(std::ostream& out, const MatchResult& result);

}  // namespace rdu::arena
