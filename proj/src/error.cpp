#include "ccqed/error.hpp"

namespace ccqed {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BasisMismatch: return "BASIS_MISMATCH";
    case ErrorCode::InvalidParams: return "INVALID_PARAMS";
    case ErrorCode::InvalidPulse: return "INVALID_PULSE";
    case ErrorCode::TruncationTooCoarse: return "TRUNCATION_TOO_COARSE";
    case ErrorCode::SingularK: return "SINGULAR_K";
    case ErrorCode::NotHermitian: return "NOT_HERMITIAN";
    case ErrorCode::ConvergenceFailure: return "CONVERGENCE_FAILURE";
    case ErrorCode::DimTooLarge: return "DIM_TOO_LARGE";
    case ErrorCode::WindowTooLong: return "WINDOW_TOO_LONG";
    case ErrorCode::IllConditioned: return "ILL_CONDITIONED";
    case ErrorCode::Validation: return "VALIDATION";
    case ErrorCode::Io: return "IO";
    case ErrorCode::InvariantViolation: return "INVARIANT_VIOLATION";
  }
  return "UNKNOWN";
}

}  // namespace ccqed
