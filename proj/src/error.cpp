#include "medshift/error.hpp"

namespace medshift {

std::string_view reason_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::validation: return "validation-error";
    case ErrorCode::far_tail: return "far-tail";
    case ErrorCode::infeasible_error_variance: return "infeasible-error-variance";
    case ErrorCode::identifiability_boundary: return "identifiability-boundary";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::singular_information: return "singular-information";
    case ErrorCode::init_error: return "init-error";
    case ErrorCode::too_many_failures: return "too-many-failures";
    case ErrorCode::evaluation_error: return "evaluation-error";
  }
  return "unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::parse_error:
    case ErrorCode::validation:
      return false;
    default:
      return true;
  }
}

}  // namespace medshift
