#include "mkedge/error.hpp"

namespace mkedge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonStochastic: return "NonStochastic";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::BadInitial: return "BadInitial";
    case ErrorCode::NotPrimitive: return "NotPrimitive";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::PsiViolated: return "PsiViolated";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::EigenvalueCollision: return "EigenvalueCollision";
    case ErrorCode::ContourTooClose: return "ContourTooClose";
    case ErrorCode::BoundViolated: return "BoundViolated";
    case ErrorCode::ComplexResidue: return "ComplexResidue";
    case ErrorCode::NotLattice: return "NotLattice";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return ErrorClass::Usage;
    case ErrorCode::ParseError:
    case ErrorCode::NonStochastic:
    case ErrorCode::NegativeEntry:
    case ErrorCode::BadInitial:
    case ErrorCode::NotPrimitive:
    case ErrorCode::PsiViolated:
    case ErrorCode::DegenerateKernel:
    case ErrorCode::NotLattice:
      return ErrorClass::Validation;
    case ErrorCode::BoundViolated:
      return ErrorClass::Verification;
    default:
      return ErrorClass::Numerical;
  }
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace mkedge
