#pragma once

// Projected density θ of a stochastic Mather measure: the stationary density
// of the optimally controlled diffusion, -∇·(θv) + σ²/2 Δθ = 0. The discrete
// θ is the null vector of the exact transpose of the generator matrix used by
// the cell solver, so the duality ∫(A_h φ)θ = 0 holds to rounding.

#include <vector>

#include "stochmather/cell_solver.hpp"
#include "stochmather/model.hpp"
#include "stochmather/torus_grid.hpp"

namespace stochmather {

struct StationaryDensity {
  ScalarField theta;  // θ >= 0, ∫θ = 1
  VectorField drift;
  double sigma = 0.0;
  double residual = 0.0;  // sup |A_hᵀ θ|
};

StationaryDensity invariant_density(const VectorField& drift, double sigma, double tol = 1e-8);

/// θ(x)·δ_{v = drift(x)} in grid form.
struct GraphMeasure {
  StationaryDensity density;
  VectorField velocity_on_graph;
  /// ∫ (L(x, v(x)) + P·v(x)) θ dx, which equals -H̄ at optimality.
  double action = 0.0;
};

GraphMeasure mather_measure(const HamiltonianModel& model, const CellSolution& solution,
                            double tol = 1e-8);

/// ∫ (L(x, v(x)) + P·v(x)) θ dx for a drift field v.
double tilted_action(const HamiltonianModel& model, const Momentum& P, const VectorField& drift,
                     const ScalarField& theta);

struct IdentityReport {
  /// max over low Fourier modes φ of |∫ (v·∇_h φ + σ²/2 Δ_h φ) θ|.
  double id1_err = 0.0;
  /// max_a |∫ D_{x_a}H θ|.
  double id2_err = 0.0;
  /// max_a |∫ D_pH θ - central difference of H̄ along e_a|.
  double id3_gap = 0.0;
  std::vector<double> mean_dpH;        // ∫ D_pH θ per axis
  std::vector<double> hbar_derivative;  // (H̄(P+δe) - H̄(P-δe)) / 2δ per axis
};

/// Modes cos(2πkx_a), sin(2πkx_a), k = 1..5, along every axis.
std::vector<ScalarField> fourier_test_basis(const TorusGrid& grid, int max_wavenumber = 5);

/// Runs two additional cell solves per axis for the finite difference of H̄.
IdentityReport check_identities(const HamiltonianModel& model, const CellSolution& solution,
                                const StationaryDensity& density, double dP,
                                const CellOptions& options = {});

}  // namespace stochmather
