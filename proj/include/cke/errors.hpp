#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cke {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A structural invariant is violated: non-finite entries, a block that is
/// not doubled-up, a matrix that should be Hermitian but is not.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// Plant and controller cannot be wired together.
class InterconnectError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario, system description or command line input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class SolverFailure {
  NotHurwitz,
  SingularInnovation,
  NoStabilizingSolution,
  IllConditioned,
};

inline std::string_view to_string(SolverFailure kind) {
  switch (kind) {
    case SolverFailure::NotHurwitz: return "NotHurwitz";
    case SolverFailure::SingularInnovation: return "SingularInnovation";
    case SolverFailure::NoStabilizingSolution: return "NoStabilizingSolution";
    case SolverFailure::IllConditioned: return "IllConditioned";
  }
  return "Unknown";
}

/// Numerical solver failure (Lyapunov / Riccati).
class SolverError : public Error {
 public:
  SolverError(SolverFailure kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  SolverFailure kind() const noexcept { return kind_; }

 private:
  SolverFailure kind_;
};

}  // namespace cke
