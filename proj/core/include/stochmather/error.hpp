#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stochmather {

enum class ErrorCode {
  invalid_argument,
  invalid_model,
  argmax_on_boundary,
  singular_policy_system,
  no_convergence,
  sigma_zero_unsupported,
  non_positive_eigenfunction,
  nonzero_momentum,
  singular_beyond_nullity,
  negative_density,
  velocity_box_too_small,
  infeasible,
  unbounded,
  pivot_limit,
  step_too_large,
  io_failure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; every solver failure in the
/// library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stochmather
