#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kgmp {

// Bad arguments: out-of-range parameters, non-finite inputs, k < 1, ...
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A field whose length does not match the grid it is used with.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SolverFailure {
  NotInvertible,
  NoNegativeEndpoint,
  NoConvergence,
  NewtonDiverged,
  Refused,
};

inline const char* to_string(SolverFailure kind) {
  switch (kind) {
    case SolverFailure::NotInvertible: return "operator not invertible";
    case SolverFailure::NoNegativeEndpoint: return "no negative endpoint";
    case SolverFailure::NoConvergence: return "no convergence";
    case SolverFailure::NewtonDiverged: return "newton diverged";
    case SolverFailure::Refused: return "refused";
  }
  return "unknown";
}

class SolverError : public std::runtime_error {
 public:
  SolverError(SolverFailure kind, const std::string& detail,
              std::vector<double> history = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        history_(std::move(history)) {}

  SolverFailure kind() const noexcept { return kind_; }
  // Diagnostic trace, e.g. the path level per outer iteration.
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  SolverFailure kind_;
  std::vector<double> history_;
};

}  // namespace kgmp
