#pragma once

// L²(θ) regularity ratios of the corrector, the closed-form σ = 0 effective
// Hamiltonian for 1D mechanical models, and σ → 0 continuation.

#include <optional>
#include <vector>

#include "stochmather/cell_solver.hpp"
#include "stochmather/model.hpp"
#include "stochmather/stationary_measure.hpp"

namespace stochmather {

struct Est1Point {
  double shift_length = 0.0;  // |y|
  double ratio = 0.0;         // ∫|∇u(·+y) - ∇u|² θ / |y|²
};

/// Centered gradients; offsets are whole-node shifts.
std::vector<Est1Point> regularity_est1(const CellSolution& solution, const StationaryDensity& density,
                                       const std::vector<Offset>& offsets);

/// True if some ratio more than doubles when |y| halves (points sorted by |y|).
bool est1_growth_flag(const std::vector<Est1Point>& points);

struct Est23 {
  double est2_ratio = 0.0;  // ∫|∇u_P - ∇u_P'|² θ_P / |P - P'|²
  double est3_ratio = 0.0;  // ∫|P + ∇u_P - P' - ∇u_P'|² θ_P / |P - P'|²
};

/// Solves the cell problem at P' (warm-started from `at_P`) and forms both
/// ratios with θ_P.
Est23 regularity_est2_est3(const HamiltonianModel& model, const CellSolution& at_P,
                           const StationaryDensity& density_P, const Momentum& P_prime,
                           const CellOptions& options = {});

/// Convenience overload doing both solves.
Est23 regularity_est2_est3(const HamiltonianModel& model, const Momentum& P, const Momentum& P_prime,
                           double sigma, const CellOptions& options = {});

struct RegularityReport {
  std::vector<Est1Point> est1;
  bool est1_growth = false;
  std::vector<double> est2_steps;  // |P - P'|
  std::vector<double> est2_ratios;
  std::vector<double> est3_ratios;
  double gamma_L = 1.0;
  double Gamma = 1.0;
  /// 10·Lip_x(L)² / γ_L², an a-priori cap on est1 and est2 ratios.
  double cap = 0.0;
};

/// est1 over |y| ∈ {h, 2h, 4h, 8h} along axis 0, est2/est3 with P' = P + δ e_0
/// for each δ in `steps`.
RegularityReport regularity_report(const HamiltonianModel& model, const CellSolution& solution,
                                   const StationaryDensity& density,
                                   const std::vector<double>& steps = {0.05, 0.025, 0.0125},
                                   const CellOptions& options = {});

/// σ = 0 effective Hamiltonian of H = p²/2 + V in 1D: max V when
/// |P| <= ∫√(2(max V - V)), otherwise the E with ∫√(2(E - V)) = |P|.
double analytic_hbar_1d(const ScalarField& V, double P);

struct SweepEntry {
  double sigma = 0.0;
  double Hbar = 0.0;
  double increment = 0.0;        // |H̄_σ - H̄_previous|, 0 for the first entry
  double u_sup_diff = 0.0;       // sup|u_σ - u_finest|, both min-normalized
  double theta_l1 = 0.0;         // ∫|θ_σ - θ_finest|
  double action = 0.0;           // ∫(L + P·v) θ_σ
  double action_error = 0.0;     // |action + H̄_σ|
  double residual = 0.0;
  int iterations = 0;
};

struct SigmaSweep {
  Momentum P;
  std::vector<SweepEntry> entries;
  /// 1D mechanical models only.
  std::optional<double> analytic_limit;
  std::optional<double> limit_gap;  // |H̄_{σ_min} - analytic_limit|
};

/// Requires strictly decreasing σ > 0 with min σ >= h. Warm-started.
SigmaSweep sigma_sweep(const HamiltonianModel& model, const Momentum& P,
                       const std::vector<double>& sigmas, const CellOptions& options = {});

}  // namespace stochmather
