#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mkedge {

enum class ErrorCode {
  // chain_core
  NonStochastic,
  NegativeEntry,
  BadInitial,
  NotPrimitive,
  SingularSystem,
  PsiViolated,
  DegenerateVariance,
  // spectral
  EigenvalueCollision,
  ContourTooClose,
  BoundViolated,
  ComplexResidue,
  // oracle
  NotLattice,
  BudgetExceeded,
  GridMismatch,
  // cli / io
  DegenerateKernel,
  ParseError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Which family an error belongs to; the CLI maps families to exit codes.
enum class ErrorClass { Usage, Validation, Numerical, Verification };

ErrorClass classify(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mkedge
