#pragma once

#include <stdexcept>
#include <string>

namespace spot {

/// Shape or index mismatch between tables, policies and models.
struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A value outside the mathematical domain of an operation (negative
/// multipliers, means outside [0,1], non-finite Q entries).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The simplex failed to terminate; what() carries a tableau dump.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No strictly feasible policy exists for the requested thresholds.
struct NoSlaterPointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spot
