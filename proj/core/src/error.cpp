#include "stochmather/error.hpp"

namespace stochmather {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::invalid_model: return "InvalidModel";
    case ErrorCode::argmax_on_boundary: return "ArgmaxOnBoundary";
    case ErrorCode::singular_policy_system: return "SingularPolicySystem";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::sigma_zero_unsupported: return "SigmaZeroUnsupported";
    case ErrorCode::non_positive_eigenfunction: return "NonPositiveEigenfunction";
    case ErrorCode::nonzero_momentum: return "NonzeroMomentum";
    case ErrorCode::singular_beyond_nullity: return "SingularBeyondNullity";
    case ErrorCode::negative_density: return "NegativeDensity";
    case ErrorCode::velocity_box_too_small: return "VelocityBoxTooSmall";
    case ErrorCode::infeasible: return "Infeasible";
    case ErrorCode::unbounded: return "Unbounded";
    case ErrorCode::pivot_limit: return "PivotLimit";
    case ErrorCode::step_too_large: return "StepTooLarge";
    case ErrorCode::io_failure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace stochmather
