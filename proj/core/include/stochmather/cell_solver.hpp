#pragma once

// Stochastic cell problem
//
//     -σ²/2 Δu + H(P + D_x u, x) = H̄(P)
//
// discretized with the centered Laplacian and the upwind (Godunov-type)
// Hamiltonian H_h(P + D^±u, x) = -min_v [L(x,v) + P·v + Σ_a v_a D^{sgn v_a}_a u].
// The discrete operator is monotone, so every policy evaluation is an
// irreducible M-matrix system.

#include <vector>

#include "stochmather/model.hpp"
#include "stochmather/torus_grid.hpp"

namespace stochmather {

struct CellOptions {
  double tol = 1e-8;
  int max_iter = 100;
  enum class Method { policy_iteration, discounted };
  /// `discounted` runs the vanishing-discount continuation first and then
  /// polishes with policy iteration; `policy_iteration` falls back to it
  /// automatically when iteration stalls.
  Method method = Method::policy_iteration;
};

struct CellSolution {
  Momentum P;
  double sigma = 0.0;
  ScalarField u;        // min u = 0
  double Hbar = 0.0;    // unshifted convention
  double residual = 0.0;
  VectorField drift;    // v = -D_pH(P + D_h u, x), upwind minimizer
  int iterations = 0;
  bool used_fallback = false;
};

CellSolution solve_cell(const HamiltonianModel& model, const Momentum& P, double sigma,
                        const CellOptions& options = {}, const ScalarField* initial_u = nullptr);

/// sup_x | -σ²/2 Δ_h u + H_h(P + D^±u, x) - H̄ |, evaluated from scratch.
double cell_residual(const HamiltonianModel& model, const Momentum& P, double sigma,
                     const ScalarField& u, double Hbar);

struct DiscountedSolution {
  double alpha = 0.0;
  ScalarField u;               // discounted value u_α (not normalized)
  double Hbar_estimate = 0.0;  // -α·mean(u_α)
  VectorField drift;
  int iterations = 0;
};

/// Solves α u = min_v [L + P·v + A^v u] by policy iteration on the discounted
/// problem. Every policy system αI - A^v is a nonsingular M-matrix.
DiscountedSolution solve_discounted(const HamiltonianModel& model, const Momentum& P, double sigma,
                                    double alpha, const CellOptions& options = {},
                                    const ScalarField* initial_u = nullptr);

struct SurfacePoint {
  Momentum P;
  double Hbar = 0.0;
  CellSolution solution;
};

/// One solve per momentum, processed in order of increasing |P| with warm
/// starts; results are returned in input order.
std::vector<SurfacePoint> effective_surface(const HamiltonianModel& model,
                                            const std::vector<Momentum>& momenta, double sigma,
                                            const CellOptions& options = {});

/// Largest centered second difference of u over nodes and axes.
double semiconcavity_bound(const CellSolution& solution);

}  // namespace stochmather
