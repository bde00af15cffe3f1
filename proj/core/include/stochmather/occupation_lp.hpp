#pragma once

// Discrete occupation-measure linear program. Variables are masses
// w(x_i, v_j) >= 0 on the product of the torus grid and a velocity box;
// constraints are total mass one and stationarity against every nodal
// test function e_k:
//
//     Σ_{i,j} (A^{v_j} e_k)(x_i) w(x_i, v_j) = 0.
//
// The stationarity block is the transpose of the policy generator matrices
// used by the cell solver. The stationarity rows sum to zero, so the row of
// node 0 is dropped.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "stochmather/model.hpp"
#include "stochmather/simplex.hpp"
#include "stochmather/torus_grid.hpp"

namespace stochmather {

struct LpOptions {
  double tol = 1e-9;
  std::size_t max_pivots = 1'000'000;
  /// Required ratio v_max / max|drift| from the coarse pre-check.
  double box_margin = 1.25;
  bool check_box = true;
};

struct LpInstance {
  TorusGrid grid;
  VelocityGrid velocities;
  double sigma = 0.0;
  Momentum P;
  /// Shift making every cost nonnegative; value() - shift is the action.
  double shift = 0.0;
  /// Row 0: mass. Row r >= 1: stationarity for x-node r.
  LinearProgram program;

  std::size_t column(std::size_t node, std::size_t velocity) const noexcept {
    return node * velocities.size() + velocity;
  }
};

/// Masses w(x_i, v_j) with density μ = w / (hⁿ Δvⁿ).
struct DiscreteOccupationMeasure {
  TorusGrid grid;
  VelocityGrid velocities;
  std::vector<double> weights;  // column order of LpInstance

  double total_mass() const;
  /// Density of the x-marginal, Σ_j w(·, v_j) / hⁿ.
  ScalarField x_marginal() const;
  /// Mass farther than one velocity cell (sup norm) from drift(x_i).
  double off_graph_mass(const VectorField& drift) const;
};

struct LpSolution {
  /// min Σ c w including the shift.
  double value = 0.0;
  /// value - shift, comparable with -H̄.
  double action_value = 0.0;
  DiscreteOccupationMeasure measure;
  /// Per-row duals: y_0 = λ_mass, y_k for the retained stationarity rows.
  std::vector<double> duals;
  /// φ_k = -y_k with φ_0 = 0; solves the discrete cell problem on the
  /// support of the measure.
  ScalarField dual_potential;
  double complementarity = 0.0;
  double dual_infeasibility = 0.0;
  double gap = 0.0;
  std::size_t pivots = 0;
};

/// Throws VelocityBoxTooSmall when v_max < margin·max|drift| of a coarse
/// cell solve. For tabulated models the velocity grid must equal the
/// model's own grid.
LpInstance build_lp(const HamiltonianModel& model, const VelocityGrid& velocities, double sigma,
                    const Momentum& P, const LpOptions& options = {});

LpSolution solve_lp(const LpInstance& instance, const LpOptions& options = {});

/// Primal value minus the dual objective bᵀy = y_0.
double duality_gap(const LpInstance& instance, double primal_value, std::span<const double> duals);

/// max over columns of max(0, (Aᵀy - c)_j).
double dual_infeasibility(const LpInstance& instance, std::span<const double> duals);

/// max over columns of w_j · |c_j - (Aᵀy)_j|.
double complementarity_violation(const LpInstance& instance, std::span<const double> weights,
                                 std::span<const double> duals);

/// Measure uniform in x with all mass on the velocity node closest to 0.
std::vector<double> uniform_rest_measure(const LpInstance& instance);

}  // namespace stochmather
