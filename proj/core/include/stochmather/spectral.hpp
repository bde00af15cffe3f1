#pragma once

// Principal eigenvalue route for mechanical Hamiltonians H = |p|²/2 + V.
// With ψ = e^{-u/σ²}, the cell problem becomes the linear eigenproblem
//
//     Lψ = σ⁴/2 Δψ - σ² P·∇ψ + (V + |P|²/2) ψ = H̄ ψ,
//
// whose principal (Perron) eigenvalue is H̄(P).

#include <vector>

#include <Eigen/SparseCore>

#include "stochmather/model.hpp"
#include "stochmather/torus_grid.hpp"

namespace stochmather {

struct SpectralOptions {
  double tol = 1e-11;
  int max_iter = 200;
};

struct EigenBracket {
  double lower = 0.0;
  double upper = 0.0;
};

struct EigenSolution {
  double eigenvalue = 0.0;
  ScalarField eigenfunction;  // ψ > 0, max ψ = 1
  double sigma = 0.0;
  Momentum P;
  double residual = 0.0;      // sup |L_h ψ - λψ|
  int iterations = 0;
  /// Collatz–Wielandt bounds min/max (L_h ψ)_i / ψ_i after each iterate.
  std::vector<EigenBracket> history;
};

/// Discrete L_h with the drift -σ²P upwinded, so off-diagonals are
/// nonnegative and sI - L_h is an M-matrix for s above the Perron root.
Eigen::SparseMatrix<double, Eigen::RowMajor> tilted_operator(const ScalarField& V, const Momentum& P,
                                                             double sigma);

/// Inverse iteration on (sI - L_h). The first shift is
/// max V + |P|²/2 + σ⁴/h² + 1; later shifts move down to just above the
/// current Collatz–Wielandt upper bound, which keeps sI - L_h an M-matrix.
EigenSolution principal_eigenvalue(const ScalarField& V, const Momentum& P, double sigma,
                                   const SpectralOptions& options = {});

/// u = -σ² log ψ, shifted so that min u = 0.
ScalarField u_from_eigenfunction(const EigenSolution& eig);

/// θ = e^{-2u/σ²} normalized to unit mass. Only P = 0 gives a periodic
/// probability density.
ScalarField explicit_theta(const ScalarField& u, const Momentum& P, double sigma);

}  // namespace stochmather
