#include "rdu/cop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>

#include "rdu/error.hpp"

namespace rdu {

namespace {

bool is_integral(double v) { return std::isfinite(v) && v == std::round(v) && std::abs(v) < 1e15; }

// Sorted samples as utilities in the maximizing direction.
std::vector<double> utilities_of(const PreferenceEstimate& e, Sense sense) {
  if (sense == Sense::Maximize) return e.sample_objectives;
  std::vector<double> u(e.sample_objectives.rbegin(), e.sample_objectives.rend());
  for (double& v : u) v = -v;
  return u;
}

}  // namespace

CopInstance::CopInstance(std::vector<DecisionVar> decision_vars,
                         std::vector<StochasticVar> stochastic_vars,
                         std::vector<Constraint> constraints, StochasticObjective objective,
                         Deformation phi, int k)
    : decision_vars_(std::move(decision_vars)),
      stochastic_vars_(std::move(stochastic_vars)),
      constraints_(std::move(constraints)),
      objective_(std::move(objective)),
      phi_(std::move(phi)),
      k_(k) {
  if (k_ < 1) throw Error(ErrorKind::InvalidInstance, "k must be >= 1");
  if (!objective_.evaluate) throw Error(ErrorKind::InvalidInstance, "missing objective");

  std::set<std::string> names;
  for (const DecisionVar& v : decision_vars_) {
    if (v.name.empty()) throw Error(ErrorKind::InvalidInstance, "empty variable name");
    if (v.lo > v.hi) {
      throw Error(ErrorKind::InvalidInstance, "domain of '" + v.name + "' has lo > hi");
    }
    if (!names.insert(v.name).second) throw Error(ErrorKind::DuplicateName, v.name);
  }
  for (const StochasticVar& v : stochastic_vars_) {
    if (v.name.empty()) throw Error(ErrorKind::InvalidInstance, "empty variable name");
    if (!names.insert(v.name).second) throw Error(ErrorKind::DuplicateName, v.name);
  }

  rows_.reserve(constraints_.size());
  for (const Constraint& c : constraints_) {
    std::vector<double> row(decision_vars_.size(), 0.0);
    for (const LinearTerm& t : c.terms) {
      row[index_of(t.var)] += t.coefficient;
      integral_ = integral_ && is_integral(t.coefficient);
    }
    integral_ = integral_ && is_integral(c.constant);
    rows_.push_back(std::move(row));
  }
}

std::size_t CopInstance::index_of(const std::string& decision_var) const {
  for (std::size_t i = 0; i < decision_vars_.size(); ++i) {
    if (decision_vars_[i].name == decision_var) return i;
  }
  throw Error(ErrorKind::UnknownVariable, "'" + decision_var + "' is not a decision variable");
}

bool CopInstance::in_domain(std::span<const int> d) const {
  if (d.size() != decision_vars_.size()) return false;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] < decision_vars_[i].lo || d[i] > decision_vars_[i].hi) return false;
  }
  return true;
}

FeasibilityReport is_feasible(const CopInstance& inst, std::span<const int> d) {
  if (!inst.in_domain(d)) {
    throw Error(ErrorKind::InvalidInstance, "decision has wrong length or leaves its domain");
  }
  FeasibilityReport report;
  const auto& rows = inst.coefficient_rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Constraint& c = inst.constraints()[i];
    ConstraintReport entry{i, 0.0, true};
    if (inst.integral()) {
      std::int64_t lhs = 0;
      for (std::size_t j = 0; j < d.size(); ++j) {
        lhs += static_cast<std::int64_t>(rows[i][j]) * d[j];
      }
      const std::int64_t diff = lhs - static_cast<std::int64_t>(c.constant);
      entry.signed_violation = static_cast<double>(diff);
      entry.satisfied = c.kind == Constraint::Kind::LinearEq ? diff == 0 : diff <= 0;
    } else {
      double lhs = 0.0;
      for (std::size_t j = 0; j < d.size(); ++j) lhs += rows[i][j] * d[j];
      const double diff = lhs - c.constant;
      entry.signed_violation = diff;
      entry.satisfied = c.kind == Constraint::Kind::LinearEq
                            ? std::abs(diff) <= kFeasibilityTolerance
                            : diff <= kFeasibilityTolerance;
    }
    report.feasible = report.feasible && entry.satisfied;
    report.constraints.push_back(entry);
  }
  return report;
}

SampleBatch draw_batch(const CopInstance& inst, RngStream& rng) {
  return sample_batch(inst.stochastic_vars(), inst.k(), rng);
}

PreferenceEvaluator::PreferenceEvaluator(const CopInstance& inst, const SampleBatch& batch)
    : inst_(inst), batch_(batch) {
  if (batch.cols() != inst.stochastic_vars().size() ||
      batch.rows() != static_cast<std::size_t>(inst.k())) {
    throw Error(ErrorKind::InvalidInstance, "sample batch does not match the instance");
  }
  const std::size_t k = batch.rows();
  weights_.assign(k, 0.0);
  for (std::size_t i = 1; i < k; ++i) {
    weights_[i] = inst.phi()(static_cast<double>(k - i) / static_cast<double>(k));
  }
}

double PreferenceEvaluator::rank_dependent_value(std::span<const double> sorted) const {
  double value = sorted[0];
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    value += (sorted[i] - sorted[i - 1]) * weights_[i];
  }
  return value;
}

PreferenceEstimate PreferenceEvaluator::operator()(std::span<const int> d) const {
  const bool minimize = inst_.objective().sense == Sense::Minimize;
  std::vector<double> utilities(batch_.rows());
  for (std::size_t i = 0; i < batch_.rows(); ++i) {
    const double f = inst_.objective().evaluate(d, batch_.row(i));
    utilities[i] = minimize ? -f : f;
  }
  std::sort(utilities.begin(), utilities.end());
  const double value = rank_dependent_value(utilities);

  PreferenceEstimate estimate;
  if (minimize) {
    estimate.rdu_value = -value;
    estimate.sample_objectives.assign(utilities.rbegin(), utilities.rend());
    for (double& v : estimate.sample_objectives) v = -v;
  } else {
    estimate.rdu_value = value;
    estimate.sample_objectives = std::move(utilities);
  }
  return estimate;
}

PreferenceEstimate estimate_preference(const CopInstance& inst, std::span<const int> d,
                                       const SampleBatch& batch) {
  if (!is_feasible(inst, d).feasible) {
    throw Error(ErrorKind::InfeasibleDecision, "decision violates a constraint");
  }
  return PreferenceEvaluator(inst, batch)(d);
}

std::weak_ordering compare_estimates(const PreferenceEstimate& a, const PreferenceEstimate& b,
                                     Sense sense) {
  const double va = sense == Sense::Maximize ? a.rdu_value : -a.rdu_value;
  const double vb = sense == Sense::Maximize ? b.rdu_value : -b.rdu_value;
  if (va > vb) return std::weak_ordering::greater;
  if (va < vb) return std::weak_ordering::less;
  const std::vector<double> ua = utilities_of(a, sense);
  const std::vector<double> ub = utilities_of(b, sense);
  if (std::lexicographical_compare(ub.begin(), ub.end(), ua.begin(), ua.end())) {
    return std::weak_ordering::greater;
  }
  if (std::lexicographical_compare(ua.begin(), ua.end(), ub.begin(), ub.end())) {
    return std::weak_ordering::less;
  }
  return std::weak_ordering::equivalent;
}

std::weak_ordering compare(const CopInstance& inst, std::span<const int> d1,
                           std::span<const int> d2, const SampleBatch& batch) {
  return compare_estimates(estimate_preference(inst, d1, batch),
                           estimate_preference(inst, d2, batch), inst.objective().sense);
}

}  // namespace rdu
