#pragma once

// Dense two-phase tableau simplex for
//
//     minimize cᵀx  subject to  Ax = b, x >= 0,
//
// with Bland's smallest-index rule for both the entering and the leaving
// variable, so degenerate problems terminate.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace stochmather {

struct LinearProgram {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

struct SimplexOptions {
  /// Threshold on reduced costs and pivot elements.
  double pivot_tol = 1e-11;
  /// Phase-one objective above this (relative to ‖b‖∞) means infeasible.
  double feasibility_tol = 1e-9;
  std::size_t max_pivots = 1'000'000;
};

struct SimplexResult {
  Eigen::VectorXd x;
  /// Equality duals: reduced costs are c - Aᵀy >= 0 at optimality.
  Eigen::VectorXd y;
  double value = 0.0;
  std::size_t pivots = 0;
  std::vector<std::size_t> basis;
};

/// Throws Error{infeasible | unbounded | pivot_limit}.
SimplexResult solve_simplex(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace stochmather
