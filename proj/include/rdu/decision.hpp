#pragma once

// Lotteries, probability deformation functions and Rank Dependent Utility.

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rdu {

struct Outcome {
  double consequence = 0.0;
  double probability = 0.0;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

// A finite lottery in canonical form: consequences strictly increasing,
// probabilities strictly positive and summing to one. Only make_lottery
// produces instances, so every Lottery satisfies these invariants.
class Lottery {
 public:
  std::span<const Outcome> outcomes() const { return outcomes_; }
  std::size_t size() const { return outcomes_.size(); }
  double min_consequence() const { return outcomes_.front().consequence; }
  double max_consequence() const { return outcomes_.back().consequence; }

  friend bool operator==(const Lottery&, const Lottery&) = default;

 private:
  friend Lottery make_lottery(std::span<const Outcome> raw);
  std::vector<Outcome> outcomes_;
};

// Sorts by consequence, merges equal consequences, drops zero-probability
// entries and renormalizes. Throws NegativeProbability or
// ProbabilityMassInvalid (mass off by more than 1e-6, or empty lottery).
Lottery make_lottery(std::span<const Outcome> raw);
Lottery make_lottery(std::initializer_list<Outcome> raw);

// Monotone map [0,1] -> [0,1] used to deform tail probabilities.
//
//   Identity             phi(p) = p
//   LogisticPessimistic  phi(p) = 1 / (1 + exp(-lambda * (2p - shift)))
//   LogitOptimistic      phi(p) = 1 + log(p / (2 - p)) / lambda, phi(0) = 0
//   Custom               piecewise linear through tabulated (p, phi) knots
//
// Outputs are clamped into [0,1]; endpoints are not renormalized, so the
// named shapes give phi(0) > 0 or phi(1) < 1 by tiny amounts.
class Deformation {
 public:
  enum class Kind { Identity, LogisticPessimistic, LogitOptimistic, Custom };

  static constexpr double kDefaultLambda = 10.0;
  static constexpr double kDefaultShift = 1.3;

  Deformation() = default;

  static Deformation identity();
  static Deformation logistic(double lambda = kDefaultLambda,
                              double shift = kDefaultShift);
  static Deformation logit(double lambda = kDefaultLambda);
  // Knots must start at p=0, end at p=1, have strictly increasing p and
  // non-decreasing values.
  static Deformation custom(std::vector<std::pair<double, double>> knots);

  // Parses "identity", "logistic[:lambda[:shift]]", "logit[:lambda]" and
  // "custom:p0=v0;p1=v1;...". Throws InvalidConfig.
  static Deformation parse(const std::string& text);

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double shift() const { return shift_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  // Throws DomainError outside [0,1].
  double operator()(double p) const;

  // Inverse of parse for the named kinds.
  std::string describe() const;

  friend bool operator==(const Deformation&, const Deformation&) = default;

 private:
  Kind kind_ = Kind::Identity;
  double lambda_ = kDefaultLambda;
  double shift_ = kDefaultShift;
  std::vector<std::pair<double, double>> knots_;
};

inline double deform(const Deformation& phi, double p) { return phi(p); }

// Extension point; only the identity utility is shipped.
struct UtilityFunction {
  enum class Kind { Identity };
  Kind kind = Kind::Identity;

  double operator()(double x) const { return x; }
};

double rdu(const Lottery& lottery, const UtilityFunction& utility,
           const Deformation& phi);
double expected_utility(const Lottery& lottery, const UtilityFunction& utility);

}  // namespace rdu
