#include "rdu/decision.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "rdu/error.hpp"

namespace rdu {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NegativeProbability: return "NegativeProbability";
    case ErrorKind::ProbabilityMassInvalid: return "ProbabilityMassInvalid";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::UnknownVariable: return "UnknownVariable";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::InvalidInstance: return "InvalidInstance";
    case ErrorKind::InfeasibleDecision: return "InfeasibleDecision";
    case ErrorKind::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {

constexpr double kMassTolerance = 1e-6;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double parse_number(const std::string& text, const std::string& context) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(value)) {
    throw Error(ErrorKind::InvalidConfig,
                "bad number '" + text + "' in deformation spec '" + context + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream in(text);
  while (std::getline(in, current, sep)) parts.push_back(current);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

Lottery make_lottery(std::span<const Outcome> raw) {
  double mass = 0.0;
  for (const Outcome& o : raw) {
    if (!std::isfinite(o.consequence) || !std::isfinite(o.probability)) {
      throw Error(ErrorKind::ProbabilityMassInvalid, "non-finite lottery entry");
    }
    if (o.probability < 0.0) {
      throw Error(ErrorKind::NegativeProbability,
                  "probability " + std::to_string(o.probability));
    }
    mass += o.probability;
  }
  if (raw.empty() || std::abs(mass - 1.0) > kMassTolerance) {
    throw Error(ErrorKind::ProbabilityMassInvalid,
                "probabilities sum to " + std::to_string(mass));
  }

  std::vector<Outcome> sorted(raw.begin(), raw.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Outcome& a, const Outcome& b) {
                     return a.consequence < b.consequence;
                   });

  Lottery lottery;
  for (const Outcome& o : sorted) {
    if (o.probability == 0.0) continue;
    if (!lottery.outcomes_.empty() &&
        lottery.outcomes_.back().consequence == o.consequence) {
      lottery.outcomes_.back().probability += o.probability;
    } else {
      lottery.outcomes_.push_back(o);
    }
  }
  double kept = 0.0;
  for (const Outcome& o : lottery.outcomes_) kept += o.probability;
  if (std::abs(kept - 1.0) > 1e-12) {
    for (Outcome& o : lottery.outcomes_) o.probability /= kept;
  }
  return lottery;
}

Lottery make_lottery(std::initializer_list<Outcome> raw) {
  return make_lottery(std::span<const Outcome>(raw.begin(), raw.size()));
}

Deformation Deformation::identity() { return Deformation(); }

Deformation Deformation::logistic(double lambda, double shift) {
  if (!(lambda > 0.0) || !std::isfinite(lambda) || !std::isfinite(shift)) {
    throw Error(ErrorKind::InvalidConfig, "logistic needs lambda > 0 and finite shift");
  }
  Deformation phi;
  phi.kind_ = Kind::LogisticPessimistic;
  phi.lambda_ = lambda;
  phi.shift_ = shift;
  return phi;
}

Deformation Deformation::logit(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidConfig, "logit needs lambda > 0");
  }
  Deformation phi;
  phi.kind_ = Kind::LogitOptimistic;
  phi.lambda_ = lambda;
  return phi;
}

Deformation Deformation::custom(std::vector<std::pair<double, double>> knots) {
  if (knots.size() < 2 || knots.front().first != 0.0 || knots.back().first != 1.0) {
    throw Error(ErrorKind::InvalidConfig,
                "custom deformation needs knots spanning p=0 to p=1");
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].first > knots[i - 1].first)) {
      throw Error(ErrorKind::InvalidConfig, "custom knots must have increasing p");
    }
    if (knots[i].second < knots[i - 1].second) {
      throw Error(ErrorKind::InvalidConfig, "custom knots must be non-decreasing");
    }
  }
  for (const auto& [p, v] : knots) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidConfig, "non-finite knot");
  }
  Deformation phi;
  phi.kind_ = Kind::Custom;
  phi.knots_ = std::move(knots);
  return phi;
}

Deformation Deformation::parse(const std::string& text) {
  const std::vector<std::string> parts = split(text, ':');
  if (parts.empty()) throw Error(ErrorKind::InvalidConfig, "empty deformation spec");
  const std::string& name = parts[0];

  if (name == "identity" && parts.size() == 1) return identity();
  if (name == "logistic" && parts.size() <= 3) {
    const double lambda = parts.size() > 1 ? parse_number(parts[1], text) : kDefaultLambda;
    const double shift = parts.size() > 2 ? parse_number(parts[2], text) : kDefaultShift;
    return logistic(lambda, shift);
  }
  if (name == "logit" && parts.size() <= 2) {
    return logit(parts.size() > 1 ? parse_number(parts[1], text) : kDefaultLambda);
  }
  if (name == "custom" && parts.size() == 2) {
    std::vector<std::pair<double, double>> knots;
    for (const std::string& knot : split(parts[1], ';')) {
      const auto eq = knot.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::InvalidConfig, "custom knot '" + knot + "' lacks '='");
      }
      knots.emplace_back(parse_number(knot.substr(0, eq), text),
                         parse_number(knot.substr(eq + 1), text));
    }
    return custom(std::move(knots));
  }
  throw Error(ErrorKind::InvalidConfig, "unknown deformation spec '" + text + "'");
}

double Deformation::operator()(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::DomainError, "deformation argument " + std::to_string(p));
  }
  switch (kind_) {
    case Kind::Identity:
      return p;
    case Kind::LogisticPessimistic:
      return clamp01(1.0 / (1.0 + std::exp(-lambda_ * (2.0 * p - shift_))));
    case Kind::LogitOptimistic:
      if (p == 0.0) return 0.0;
      return clamp01(1.0 + std::log(p / (2.0 - p)) / lambda_);
    case Kind::Custom: {
      const auto upper = std::upper_bound(
          knots_.begin(), knots_.end(), p,
          [](double value, const auto& knot) { return value < knot.first; });
      if (upper == knots_.end()) return clamp01(knots_.back().second);
      const auto lower = upper - 1;
      const double t = (p - lower->first) / (upper->first - lower->first);
      return clamp01(lower->second + t * (upper->second - lower->second));
    }
  }
  return p;
}

std::string Deformation::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case Kind::Identity: out << "identity"; break;
    case Kind::LogisticPessimistic: out << "logistic:" << lambda_ << ':' << shift_; break;
    case Kind::LogitOptimistic: out << "logit:" << lambda_; break;
    case Kind::Custom: {
      out << "custom:";
      for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (i) out << ';';
        out << knots_[i].first << '=' << knots_[i].second;
      }
      break;
    }
  }
  return out.str();
}

double rdu(const Lottery& lottery, const UtilityFunction& utility,
           const Deformation& phi) {
  const auto outcomes = lottery.outcomes();
  const std::size_t n = outcomes.size();

  // tail[i] = p_i + ... + p_n, accumulated from the back.
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) tail[i] = tail[i + 1] + outcomes[i].probability;

  double value = utility(outcomes[0].consequence);
  for (std::size_t i = 1; i < n; ++i) {
    const double gap = utility(outcomes[i].consequence) - utility(outcomes[i - 1].consequence);
    value += gap * phi(std::min(tail[i], 1.0));
  }
  return value;
}

double expected_utility(const Lottery& lottery, const UtilityFunction& utility) {
  double value = 0.0;
  for (const Outcome& o : lottery.outcomes()) value += o.probability * utility(o.consequence);
  return value;
}

}  // namespace rdu
