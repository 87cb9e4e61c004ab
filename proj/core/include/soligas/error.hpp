#pragma once

#include <stdexcept>
#include <string>

namespace soligas {

enum class ErrorKind {
  InvalidArgument,
  CoincidentSpectral,
  Ordering,
  LengthMismatch,
  RepresentationFailure,
  CapExceeded,
  InconsistentDisplacements,
  SolverFailure,
  Unsupported,
  QuadratureFailure,
  OverlappingSubsets,
  CflViolation,
  SingularSystem,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::CoincidentSpectral: return "coincident spectral parameters";
    case ErrorKind::Ordering: return "spectral ordering violated";
    case ErrorKind::LengthMismatch: return "length mismatch";
    case ErrorKind::RepresentationFailure: return "representation failure";
    case ErrorKind::CapExceeded: return "exact expansion cap exceeded";
    case ErrorKind::InconsistentDisplacements: return "inconsistent displacements";
    case ErrorKind::SolverFailure: return "solver failure";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::QuadratureFailure: return "quadrature failure";
    case ErrorKind::OverlappingSubsets: return "overlapping subsets";
    case ErrorKind::CflViolation: return "CFL violation";
    case ErrorKind::SingularSystem: return "singular system";
  }
  return "unknown";
}

}  // namespace soligas
