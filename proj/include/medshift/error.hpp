#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace medshift {

enum class ErrorCode {
  invalid_argument,
  parse_error,
  validation,
  far_tail,
  infeasible_error_variance,
  identifiability_boundary,
  non_convergence,
  singular_information,
  init_error,
  too_many_failures,
  evaluation_error,
};

/// Machine-readable reason string, e.g. "infeasible-error-variance".
std::string_view reason_string(ErrorCode code);

/// True for failures of the numerics (as opposed to bad input).
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view reason() const { return reason_string(code_); }

 private:
  ErrorCode code_;
};

}  // namespace medshift
