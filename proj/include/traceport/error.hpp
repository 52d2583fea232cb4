#pragma once

#include <stdexcept>
#include <string>

namespace traceport {

// Malformed input: bad shapes, violated invariants, unparsable files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Well-formed input for which the computation has no meaningful answer
// (degenerate variance, no admissible exponent, ...).
class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace traceport
