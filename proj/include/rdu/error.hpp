#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rdu {

enum class ErrorKind {
  NegativeProbability,
  ProbabilityMassInvalid,
  DomainError,
  InvalidDistribution,
  UnknownVariable,
  DuplicateName,
  InvalidInstance,
  InfeasibleDecision,
  InstanceTooLarge,
  InvalidState,
  InvalidConfig,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rdu
