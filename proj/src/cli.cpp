#include "rdu/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include "rdu/arena.hpp"
#include "rdu/error.hpp"
#include "rdu/io.hpp"

namespace rdu::cli {

namespace {

constexpr const char* kLotteryHelp = R"(Lottery file: a JSON array of outcomes, canonicalized on load.
  [{"x": 0, "p": 0.5}, {"x": 10, "p": 0.5}]
--phi takes identity, logistic, logit, or a full spec such as
"logistic:10:1.3", "logit:5" or "custom:0=0;0.5=0.2;1=1".)";

constexpr const char* kInstanceHelp = R"(Instance file, generic form:
  {"decision_vars": [{"name": "x", "lo": 0, "hi": 5}],
   "stochastic_vars": [{"name": "s", "support": [[0, 0.5], [2, 0.5]]}],
   "constraints": [{"kind": "le", "terms": [[1, "x"]], "constant": 4}],
   "objective": {"sense": "max", "targets": [
       {"constant": 0, "decision": {"x": 1}, "stochastic": {"s": -1}, "cap": 1}]},
   "phi": "logistic", "k": 50, "solver": {"budget_iters": 5000}}
The objective is the sum over targets of min(cap, constant + terms).

Production form:
  {"production": {
     "state": {"our_units": {"H": 0, "L": 0, "R": 0}, "stock": 6,
               "observed_enemy": {"H": 0, "L": 1, "R": 0}, "tick": 0},
     "coeffs": {"need": [[1, 0.3738, 1.34], [2.675, 1, 0.41], [0.75, 2.45, 1]]},
     "mode": "counter_power", "threshold": 20,
     "enemy": {"H": {"support": [[0, 1]]}, "L": {"support": [[1, 0.5], [2, 0.5]]},
               "R": {"support": [[0, 1]]}}},
   "phi": "identity", "k": 50}
"enemy" may be replaced by "generator" (see `rdu match --help`).
The solver block accepts budget_ms or budget_iters, seed, tabu and restart;
command-line flags take precedence.)";

constexpr const char* kStatsHelp = R"(Stats file (every field optional):
  {"hit_points": [7, 5, 5], "damage": [2, 2, 2],
   "multiplier": [[1, 1.4, 0.7], [0.7, 1, 1.4], [1.4, 0.7, 1]],
   "hit_chance": 0.1}
Rows and columns are ordered heavy, light, ranged; multiplier[attacker][defender].)";

constexpr const char* kScenarioHelp = R"(Bots: random, eu, rdu-pess, rdu-opt, rush, or any phi spec.

Scenario file (every field optional):
  {"player": {"stock": 6, "income_per_tick": 0.25, "units": [0, 0, 0],
              "base_hit_points": 40},
   "max_ticks": 400, "observation_prob": 0.5, "decision_epoch": 10,
   "build_ticks": [6, 4, 4], "stats": {...}, "coeffs": {"need": [[...]]},
   "mode": "counter_power", "threshold": 20, "k": 50,
   "solver": {"budget_iters": 1000},
   "enemy_prior": {"enemyUnits_L": [{"from": 0, "to": 400, "family": "poisson_linear",
                                     "intercept": 1, "slope": 0.12}], ...}}
Generator families: poisson_linear, uniform_linear (intercept, slope) and
fixed ("support": [[value, p], ...]). Every enemyUnits_H/L/R needs a rule.)";

void print_table(std::ostream& out, const arena::MatchResult& result) {
  const auto row = [&out](const std::string& bot, const arena::Tally& t) {
    out << std::left << std::setw(12) << bot << std::right << std::setw(6) << t.wins
        << std::setw(6) << t.ties << std::setw(6) << t.losses << std::setw(9) << t.score()
        << std::setw(12) << std::fixed << std::setprecision(4) << t.normalized_score() << '\n';
    out.unsetf(std::ios::floatfield);
  };
  out << std::left << std::setw(12) << "bot" << std::right << std::setw(6) << "win"
      << std::setw(6) << "tie" << std::setw(6) << "loss" << std::setw(9) << "score"
      << std::setw(12) << "normalized" << '\n';
  row(result.bot_a, result.a);
  row(result.bot_b, result.b);
}

arena::Scenario load_scenario(const std::string& path) {
  return path.empty() ? arena::default_scenario() : io::scenario_from_json(io::read_json_file(path));
}

void apply_budget(SolverConfig& cfg, const std::optional<std::int64_t>& ms,
                  const std::optional<std::int64_t>& iters) {
  if (ms) cfg.budget = Budget::milliseconds(*ms);
  if (iters) cfg.budget = Budget::iterations(*iters);
  cfg.validate();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::InvalidConfig, "cannot write '" + path + "'");
  return file;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank Dependent Utility decisions for RTS unit production"};
  app.name("rdu");
  app.require_subcommand(1);

  // eval
  std::string lottery_path;
  std::string phi_kind = "identity";
  std::optional<double> lambda;
  std::optional<double> shift;
  CLI::App* eval = app.add_subcommand("eval", "RDU and EU of a lottery");
  eval->add_option("--lottery", lottery_path, "lottery JSON file")->required();
  eval->add_option("--phi", phi_kind, "deformation kind or spec")->capture_default_str();
  eval->add_option("--lambda", lambda, "deformation steepness");
  eval->add_option("--shift", shift, "logistic shift");
  eval->footer(kLotteryHelp);

  // solve
  std::string instance_path;
  std::optional<std::uint64_t> solve_seed;
  std::optional<std::int64_t> budget_ms;
  std::optional<std::int64_t> budget_iters;
  std::optional<int> tabu;
  std::optional<int> restart;
  bool exhaustive = false;
  CLI::App* solve_cmd = app.add_subcommand("solve", "best decision for a COP instance");
  solve_cmd->add_option("--instance", instance_path, "instance JSON file")->required();
  solve_cmd->add_option("--seed", solve_seed, "seed for the sample batch and the solver");
  auto* ms_opt = solve_cmd->add_option("--budget-ms", budget_ms, "wall-clock budget (default 100)");
  solve_cmd->add_option("--budget-iters", budget_iters, "iteration budget")->excludes(ms_opt);
  solve_cmd->add_option("--tabu", tabu, "tabu tenure");
  solve_cmd->add_option("--restart", restart, "non-improving iterations before a restart");
  solve_cmd->add_flag("--exhaustive", exhaustive, "enumerate every assignment instead");
  solve_cmd->footer(kInstanceHelp);

  // coeffs
  std::string stats_path;
  int duel_games = arena::kDefaultDuelGames;
  int army_size = arena::kDefaultArmySize;
  std::uint64_t coeff_seed = 7;
  CLI::App* coeffs = app.add_subcommand("coeffs", "estimate counter coefficients from duels");
  coeffs->add_option("--stats", stats_path, "unit stats JSON file");
  coeffs->add_option("--games", duel_games, "duels per pair")->capture_default_str();
  coeffs->add_option("--army-size", army_size, "units per side")->capture_default_str();
  coeffs->add_option("--seed", coeff_seed, "random seed")->capture_default_str();
  coeffs->footer(kStatsHelp);

  // match
  std::string bot_a = "eu";
  std::string bot_b = "rush";
  int match_games = 100;
  std::uint64_t match_seed = 0;
  std::string scenario_path;
  std::string csv_path;
  std::string summary_path;
  int jobs = 1;
  std::optional<std::int64_t> match_ms;
  std::optional<std::int64_t> match_iters;
  CLI::App* match = app.add_subcommand("match", "play seeded games between two bots");
  match->add_option("--bot-a", bot_a, "first bot")->capture_default_str();
  match->add_option("--bot-b", bot_b, "second bot")->capture_default_str();
  match->add_option("--games", match_games, "number of games")->capture_default_str();
  match->add_option("--seed", match_seed, "base seed")->capture_default_str();
  match->add_option("--scenario", scenario_path, "scenario JSON file");
  match->add_option("--out", csv_path, "per-game CSV file (standard output if omitted)");
  match->add_option("--summary", summary_path, "JSON summary file");
  match->add_option("--jobs", jobs, "parallel games, 0 for all cores")->capture_default_str();
  auto* match_ms_opt =
      match->add_option("--budget-ms", match_ms, "wall-clock solver budget (not reproducible)");
  match->add_option("--budget-iters", match_iters, "solver iteration budget")->excludes(match_ms_opt);
  match->footer(kScenarioHelp);

  // sweep
  std::vector<std::string> phis;
  std::string opponent = "rush";
  int sweep_games = 100;
  std::uint64_t sweep_seed = 0;
  std::string sweep_scenario;
  int sweep_jobs = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "normalized score of several bots against one opponent");
  sweep->add_option("--phis", phis, "comma-separated phi specs or bot kinds")
      ->required()
      ->delimiter(',');
  sweep->add_option("--opponent", opponent, "fixed opponent")->capture_default_str();
  sweep->add_option("--games", sweep_games, "games per entry")->capture_default_str();
  sweep->add_option("--seed", sweep_seed, "base seed")->capture_default_str();
  sweep->add_option("--scenario", sweep_scenario, "scenario JSON file");
  sweep->add_option("--jobs", sweep_jobs, "parallel games, 0 for all cores")->capture_default_str();
  sweep->footer(kScenarioHelp);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (eval->parsed()) {
      Deformation phi;
      if (phi_kind.find(':') != std::string::npos) {
        if (lambda || shift) throw Error(ErrorKind::InvalidConfig, "--lambda/--shift need a bare --phi kind");
        phi = Deformation::parse(phi_kind);
      } else if (phi_kind == "identity") {
        if (lambda || shift) throw Error(ErrorKind::InvalidConfig, "identity takes no parameters");
        phi = Deformation::identity();
      } else if (phi_kind == "logistic") {
        phi = Deformation::logistic(lambda.value_or(Deformation::kDefaultLambda),
                                    shift.value_or(Deformation::kDefaultShift));
      } else if (phi_kind == "logit") {
        if (shift) throw Error(ErrorKind::InvalidConfig, "logit takes no shift");
        phi = Deformation::logit(lambda.value_or(Deformation::kDefaultLambda));
      } else {
        throw Error(ErrorKind::InvalidConfig, "unknown phi kind '" + phi_kind + "'");
      }
      const Lottery lottery = io::lottery_from_json(io::read_json_file(lottery_path));
      const UtilityFunction u;
      out << std::setprecision(15) << "RDU " << rdu::rdu(lottery, u, phi) << '\n'
          << "EU " << expected_utility(lottery, u) << '\n';
      return kExitOk;
    }

    if (solve_cmd->parsed()) {
      const io::LoadedInstance loaded = io::instance_from_json(io::read_json_file(instance_path));
      const CopInstance& inst = loaded.instance;
      SolverConfig cfg = loaded.solver.value_or(SolverConfig{});
      if (solve_seed) cfg.seed = *solve_seed;
      if (tabu) cfg.tabu_tenure = *tabu;
      if (restart) cfg.restart_interval = *restart;
      apply_budget(cfg, budget_ms, budget_iters);

      const RngStream root(cfg.seed);
      RngStream batch_rng = root.split(0);
      const SampleBatch batch = draw_batch(inst, batch_rng);
      cfg.seed = root.split(1).next_u64();
      const SolveResult result = exhaustive ? solve_exhaustive(inst, batch) : solve(inst, cfg, batch);

      io::json report = {{"feasible", result.feasible_found},
                         {"iterations", result.iterations},
                         {"evaluations", result.evaluations}};
      if (result.feasible_found) {
        report["decision"] = io::decision_to_json(inst, result.best_decision);
        report["rdu"] = result.best_preference.rdu_value;
        if (loaded.production_state) {
          report["production"] = io::to_json(production::decode(result.best_decision));
        }
      }
      out << report.dump(2) << '\n';

      if (!result.feasible_found) {
        err << "no feasible decision found\n";
        return kExitNoFeasible;
      }
      err << "rdu " << std::setprecision(12) << result.best_preference.rdu_value << " after "
          << result.iterations << " iterations, " << result.evaluations << " evaluations\n";
      if (loaded.production_state) {
        const auto plan = production::decode(result.best_decision).plan;
        const auto& ours = loaded.production_state->our_units;
        err << "build";
        for (production::UnitType t : production::kUnitTypes) {
          err << ' ' << production::letter(t) << '+' << plan[production::idx(t)] - ours[production::idx(t)];
        }
        err << ", cost " << production::production_cost(plan, ours) << " of "
            << loaded.production_state->stock << '\n';
      }
      return kExitOk;
    }

    if (coeffs->parsed()) {
      if (duel_games < 1 || army_size < 1) {
        throw Error(ErrorKind::InvalidConfig, "--games and --army-size must be >= 1");
      }
      const arena::UnitStats stats =
          stats_path.empty() ? arena::default_unit_stats() : io::unit_stats_from_json(io::read_json_file(stats_path));
      stats.validate();
      RngStream rng(coeff_seed);
      const arena::CoefficientEstimate est =
          arena::estimate_coefficients_detailed(stats, duel_games, army_size, rng);
      io::json report = io::to_json(est.matrix);
      report["survivors"] = est.survivors;
      report["max_reciprocity_error"] = est.matrix.max_reciprocity_error();
      report["reciprocity_ok"] = est.matrix.max_reciprocity_error() < 1e-6;
      out << report.dump(2) << '\n';
      return kExitOk;
    }

    if (match->parsed()) {
      if (match_games < 1) throw Error(ErrorKind::InvalidConfig, "--games must be >= 1");
      if (jobs < 0) throw Error(ErrorKind::InvalidConfig, "--jobs must be >= 0");
      const arena::BotPolicy a = arena::BotPolicy::parse(bot_a);
      const arena::BotPolicy b = arena::BotPolicy::parse(bot_b);
      arena::Scenario scenario = load_scenario(scenario_path);
      apply_budget(scenario.solver, match_ms, match_iters);
      const arena::MatchResult result = arena::run_match(a, b, scenario, match_games, match_seed, jobs);
      if (csv_path.empty()) {
        arena::write_match_csv(out, result);
        print_table(err, result);
      } else {
        std::ofstream csv = open_output(csv_path);
        arena::write_match_csv(csv, result);
        print_table(out, result);
      }
      if (!summary_path.empty()) open_output(summary_path) << io::summary_to_json(result).dump(2) << '\n';
      return kExitOk;
    }

    if (sweep->parsed()) {
      std::erase_if(phis, [](const std::string& s) { return s.empty(); });
      if (phis.empty()) throw Error(ErrorKind::InvalidConfig, "--phis is empty");
      if (sweep_games < 1) throw Error(ErrorKind::InvalidConfig, "--games must be >= 1");
      if (sweep_jobs < 0) throw Error(ErrorKind::InvalidConfig, "--jobs must be >= 0");
      std::vector<arena::BotPolicy> bots;
      for (const std::string& spec : phis) bots.push_back(arena::BotPolicy::parse(spec));
      const arena::BotPolicy rival = arena::BotPolicy::parse(opponent);
      const arena::Scenario scenario = load_scenario(sweep_scenario);
      out << "phi,wins,ties,losses,score,normalized_score\n";
      for (std::size_t i = 0; i < bots.size(); ++i) {
        const arena::MatchResult r = arena::run_match(bots[i], rival, scenario, sweep_games, sweep_seed, sweep_jobs);
        out << phis[i] << ',' << r.a.wins << ',' << r.a.ties << ',' << r.a.losses << ','
            << r.a.score() << ',' << std::setprecision(6) << r.a.normalized_score() << '\n';
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace rdu::cli
