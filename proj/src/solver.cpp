#include "rdu/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>

#include "rdu/error.hpp"

namespace rdu {

void SolverConfig::validate() const {
  if (budget.amount <= 0) throw Error(ErrorKind::InvalidConfig, "solver budget must be > 0");
  if (restart_interval <= 0) throw Error(ErrorKind::InvalidConfig, "restart interval must be > 0");
  if (tabu_tenure < 0) throw Error(ErrorKind::InvalidConfig, "tabu tenure must be >= 0");
}

namespace {

using Clock = std::chrono::steady_clock;

struct DecisionHash {
  std::size_t operator()(const Decision& d) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int v : d) {
      h ^= static_cast<std::uint32_t>(v);
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

constexpr std::size_t kCacheLimit = std::size_t{1} << 20;
constexpr int kSampledNeighbours = 4;

// Evaluates candidates through a memo table keyed by the decision vector.
class CachedEvaluator {
 public:
  CachedEvaluator(const CopInstance& inst, const SampleBatch& batch) : eval_(inst, batch) {}

  const PreferenceEstimate& operator()(const Decision& d) {
    if (auto it = cache_.find(d); it != cache_.end()) return it->second;
    if (cache_.size() >= kCacheLimit) cache_.clear();
    ++evaluations_;
    return cache_.emplace(d, eval_(d)).first->second;
  }

  std::int64_t evaluations() const { return evaluations_; }

 private:
  PreferenceEvaluator eval_;
  std::unordered_map<Decision, PreferenceEstimate, DecisionHash> cache_;
  std::int64_t evaluations_ = 0;
};

class LocalSearch {
 public:
  LocalSearch(const CopInstance& inst, const SolverConfig& cfg, const SampleBatch& batch)
      : inst_(inst),
        cfg_(cfg),
        sense_(inst.objective().sense),
        evaluate_(inst, batch),
        rng_(cfg.seed),
        rows_(inst.coefficient_rows()),
        incidence_(inst.decision_vars().size()),
        tabu_until_(inst.decision_vars().size(), 0) {
    for (std::size_t c = 0; c < rows_.size(); ++c) {
      for (std::size_t v = 0; v < rows_[c].size(); ++v) {
        if (rows_[c][v] != 0.0) incidence_[v].push_back({c, rows_[c][v]});
      }
    }
  }

  SolveResult run() {
    const auto start = Clock::now();
    restart();
    while (!exhausted(start)) {
      ++iteration_;
      if (phase_ == Phase::Repair) {
        repair_step();
      } else {
        climb_step();
      }
      if (stall_ >= cfg_.restart_interval) restart();
    }
    result_.iterations = iteration_;
    result_.evaluations = evaluate_.evaluations();
    return std::move(result_);
  }

 private:
  enum class Phase { Repair, Climb };

  struct Incidence {
    std::size_t constraint;
    double coefficient;
  };

  bool exhausted(Clock::time_point start) const {
    if (cfg_.budget.kind == Budget::Kind::Iterations) return iteration_ >= cfg_.budget.amount;
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
    return elapsed.count() >= cfg_.budget.amount;
  }

  double violation_of(std::size_t c, double lhs) const {
    const Constraint& con = inst_.constraints()[c];
    const double diff = lhs - con.constant;
    const double v = con.kind == Constraint::Kind::LinearEq ? std::abs(diff) : std::max(0.0, diff);
    return v <= kFeasibilityTolerance ? 0.0 : v;
  }

  void resync() {
    lhs_.assign(rows_.size(), 0.0);
    total_violation_ = 0.0;
    for (std::size_t c = 0; c < rows_.size(); ++c) {
      for (std::size_t v = 0; v < current_.size(); ++v) lhs_[c] += rows_[c][v] * current_[v];
      total_violation_ += violation_of(c, lhs_[c]);
    }
  }

  void restart() {
    const auto& vars = inst_.decision_vars();
    current_.resize(vars.size());
    for (std::size_t v = 0; v < vars.size(); ++v) {
      current_[v] = static_cast<int>(rng_.uniform_int(vars[v].lo, vars[v].hi));
    }
    std::fill(tabu_until_.begin(), tabu_until_.end(), 0);
    stall_ = 0;
    resync();
    run_best_violation_ = total_violation_;
    if (total_violation_ == 0.0) {
      enter_climb();
    } else {
      phase_ = Phase::Repair;
    }
  }

  // Change in total violation if variable v moves by delta.
  double move_delta(std::size_t v, int delta) const {
    double change = 0.0;
    for (const Incidence& inc : incidence_[v]) {
      change += violation_of(inc.constraint, lhs_[inc.constraint] + inc.coefficient * delta) -
                violation_of(inc.constraint, lhs_[inc.constraint]);
    }
    return change;
  }

  void apply(std::size_t v, int delta) {
    current_[v] += delta;
    for (const Incidence& inc : incidence_[v]) lhs_[inc.constraint] += inc.coefficient * delta;
  }

  void repair_step() {
    const auto& vars = inst_.decision_vars();
    std::optional<std::pair<std::size_t, int>> chosen;
    double chosen_total = std::numeric_limits<double>::infinity();
    int ties = 0;
    for (std::size_t v = 0; v < vars.size(); ++v) {
      for (int delta : {-1, 1}) {
        const int next = current_[v] + delta;
        if (next < vars[v].lo || next > vars[v].hi) continue;
        const double total = total_violation_ + move_delta(v, delta);
        const bool tabu = tabu_until_[v] > iteration_;
        if (tabu && !(total < run_best_violation_)) continue;
        if (total < chosen_total) {
          chosen = {v, delta};
          chosen_total = total;
          ties = 1;
        } else if (total == chosen_total && rng_.uniform_int(0, ties++) == 0) {
          chosen = {v, delta};
        }
      }
    }
    if (!chosen) {
      ++stall_;
      return;
    }
    apply(chosen->first, chosen->second);
    tabu_until_[chosen->first] = iteration_ + cfg_.tabu_tenure;
    resync();
    if (total_violation_ < run_best_violation_) {
      run_best_violation_ = total_violation_;
      stall_ = 0;
    } else {
      ++stall_;
    }
    if (total_violation_ == 0.0) enter_climb();
  }

  void enter_climb() {
    phase_ = Phase::Climb;
    stall_ = 0;
    collect_moves();
    current_estimate_ = evaluate_(current_);
    offer_incumbent();
  }

  void offer_incumbent() {
    if (!result_.feasible_found ||
        compare_estimates(current_estimate_, result_.best_preference, sense_) > 0) {
      result_.feasible_found = true;
      result_.best_decision = current_;
      result_.best_preference = current_estimate_;
      result_.history.push_back({iteration_, current_estimate_.rdu_value});
    }
  }

  struct Move {
    std::size_t first;
    int first_delta;
    std::size_t second;  // == first for a single-variable move
    int second_delta;
  };

  bool in_domain_after(std::size_t v, int delta) const {
    const int next = current_[v] + delta;
    return next >= inst_.decision_vars()[v].lo && next <= inst_.decision_vars()[v].hi;
  }

  bool feasible_after(const Move& m) const {
    scratch_lhs_ = lhs_;
    for (const Incidence& inc : incidence_[m.first]) {
      scratch_lhs_[inc.constraint] += inc.coefficient * m.first_delta;
    }
    if (m.second != m.first) {
      for (const Incidence& inc : incidence_[m.second]) {
        scratch_lhs_[inc.constraint] += inc.coefficient * m.second_delta;
      }
    }
    for (std::size_t c = 0; c < scratch_lhs_.size(); ++c) {
      if (violation_of(c, scratch_lhs_[c]) != 0.0) return false;
    }
    return true;
  }

  // All single and paired +-1 moves from current_ that stay feasible.
  void collect_moves() {
    moves_.clear();
    const std::size_t n = current_.size();
    for (std::size_t v = 0; v < n; ++v) {
      for (int dv : {-1, 1}) {
        if (!in_domain_after(v, dv)) continue;
        const Move single{v, dv, v, 0};
        if (feasible_after(single)) moves_.push_back(single);
        for (std::size_t w = v + 1; w < n; ++w) {
          for (int dw : {-1, 1}) {
            if (!in_domain_after(w, dw)) continue;
            const Move pair{v, dv, w, dw};
            if (feasible_after(pair)) moves_.push_back(pair);
          }
        }
      }
    }
  }

  // Pushes one variable by +-1 and greedily repairs the damage with strictly
  // improving single-variable steps that leave the pushed variable alone.
  // Reaches compound moves (e.g. trading one unit type for another) that the
  // pair neighbourhood cannot. Leaves the result in candidate_.
  bool kick_and_repair() {
    const auto& vars = inst_.decision_vars();
    const std::size_t n = vars.size();
    const auto kicked = static_cast<std::size_t>(rng_.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    const int dir = rng_.bernoulli(0.5) ? 1 : -1;
    if (!in_domain_after(kicked, dir)) return false;

    const Decision saved = current_;
    const std::vector<double> saved_lhs = lhs_;
    const double saved_violation = total_violation_;
    apply(kicked, dir);
    resync();
    // Strictly improving steps first; a sideways step is allowed when none
    // exists since an inequality can need two moves to clear.
    std::optional<std::pair<std::size_t, int>> last;
    for (std::size_t step = 0; step < 4 * n && total_violation_ > 0.0; ++step) {
      std::optional<std::pair<std::size_t, int>> chosen;
      double best = total_violation_;
      int ties = 0;
      for (std::size_t v = 0; v < n; ++v) {
        if (v == kicked) continue;
        for (int delta : {-1, 1}) {
          if (!in_domain_after(v, delta)) continue;
          if (last && last->first == v && last->second == -delta) continue;
          const double total = total_violation_ + move_delta(v, delta);
          if (total < best) {
            chosen = {v, delta};
            best = total;
            ties = 1;
          } else if (total == best && rng_.uniform_int(0, ties++) == 0) {
            chosen = {v, delta};
          }
        }
      }
      if (!chosen) break;
      apply(chosen->first, chosen->second);
      resync();
      last = chosen;
    }
    const bool ok = total_violation_ == 0.0 && current_ != saved;
    candidate_ = current_;
    current_ = saved;
    lhs_ = saved_lhs;
    total_violation_ = saved_violation;
    return ok;
  }

  // Fills candidate_ with one feasible neighbour of current_.
  bool propose() {
    if (rng_.bernoulli(0.5) || moves_.empty()) return kick_and_repair();
    const Move m = moves_[static_cast<std::size_t>(
        rng_.uniform_int(0, static_cast<std::int64_t>(moves_.size()) - 1))];
    candidate_ = current_;
    candidate_[m.first] += m.first_delta;
    if (m.second != m.first) candidate_[m.second] += m.second_delta;
    return true;
  }

  // Samples a few neighbours and moves to the best of them if it is at
  // least as good as the current point.
  void climb_step() {
    std::optional<Decision> best;
    PreferenceEstimate best_estimate;
    for (int i = 0; i < kSampledNeighbours; ++i) {
      if (!propose()) continue;
      const PreferenceEstimate& estimate = evaluate_(candidate_);
      if (!best || compare_estimates(estimate, best_estimate, sense_) > 0) {
        best = candidate_;
        best_estimate = estimate;
      }
    }
    if (!best) {
      ++stall_;
      return;
    }

    const auto order = compare_estimates(best_estimate, current_estimate_, sense_);
    const bool accept = order > 0 || (order == 0 && rng_.bernoulli(0.5));
    if (order > 0) {
      stall_ = 0;
    } else {
      ++stall_;
    }
    if (!accept) return;
    current_estimate_ = std::move(best_estimate);
    current_ = std::move(*best);
    resync();
    collect_moves();
    offer_incumbent();
  }

  const CopInstance& inst_;
  const SolverConfig& cfg_;
  Sense sense_;
  CachedEvaluator evaluate_;
  RngStream rng_;
  const std::vector<std::vector<double>>& rows_;
  std::vector<std::vector<Incidence>> incidence_;
  std::vector<std::int64_t> tabu_until_;

  Phase phase_ = Phase::Repair;
  Decision current_;
  Decision candidate_;
  std::vector<Move> moves_;
  PreferenceEstimate current_estimate_;
  std::vector<double> lhs_;
  mutable std::vector<double> scratch_lhs_;
  double total_violation_ = 0.0;
  double run_best_violation_ = 0.0;
  std::int64_t iteration_ = 0;
  int stall_ = 0;
  SolveResult result_;
};

}  // namespace

SolveResult solve(const CopInstance& inst, const SolverConfig& cfg, const SampleBatch& batch) {
  cfg.validate();
  LocalSearch search(inst, cfg, batch);
  return search.run();
}

SolveResult solve_exhaustive(const CopInstance& inst, const SampleBatch& batch) {
  const auto& vars = inst.decision_vars();
  double points = 1.0;
  for (const DecisionVar& v : vars) points *= v.domain_size();
  if (points > kExhaustiveLimit) {
    throw Error(ErrorKind::InstanceTooLarge,
                "instance has " + std::to_string(points) + " assignments, limit is 1e7");
  }

  PreferenceEvaluator evaluate(inst, batch);
  const Sense sense = inst.objective().sense;
  const auto& rows = inst.coefficient_rows();
  SolveResult result;

  Decision d(vars.size());
  for (std::size_t v = 0; v < vars.size(); ++v) d[v] = vars[v].lo;
  for (bool more = true; more;) {
    ++result.iterations;
    bool feasible = true;
    for (std::size_t c = 0; c < rows.size() && feasible; ++c) {
      double lhs = 0.0;
      for (std::size_t v = 0; v < d.size(); ++v) lhs += rows[c][v] * d[v];
      const Constraint& con = inst.constraints()[c];
      const double diff = lhs - con.constant;
      feasible = con.kind == Constraint::Kind::LinearEq ? std::abs(diff) <= kFeasibilityTolerance
                                                        : diff <= kFeasibilityTolerance;
    }
    if (feasible) {
      ++result.evaluations;
      PreferenceEstimate estimate = evaluate(d);
      if (!result.feasible_found ||
          compare_estimates(estimate, result.best_preference, sense) > 0) {
        result.feasible_found = true;
        result.best_decision = d;
        result.best_preference = std::move(estimate);
        result.history.push_back({result.iterations, result.best_preference.rdu_value});
      }
    }

    // Odometer increment, last variable fastest.
    more = false;
    for (std::size_t v = vars.size(); v-- > 0;) {
      if (d[v] < vars[v].hi) {
        ++d[v];
        more = true;
        break;
      }
      d[v] = vars[v].lo;
    }
  }
  return result;
}

}  // namespace rdu
