#pragma once

// Euler–Maruyama simulation of dx = v(x) dt + σ dw on the torus, with v the
// nodal drift of a cell solution interpolated multilinearly. Positions are
// tracked on the universal cover so that displacements are meaningful.

#include <cstdint>
#include <vector>

#include "stochmather/cell_solver.hpp"
#include "stochmather/torus_grid.hpp"

namespace stochmather {

struct SimulationConfig {
  double horizon = 200.0;
  double dt = 1e-3;
  int paths = 256;
  std::uint64_t seed = 7;
  Coord x0{0.0, 0.0};
  /// 0 picks the hardware concurrency. Results do not depend on it.
  unsigned threads = 0;
};

struct PathEnsemble {
  SimulationConfig config;
  std::int64_t steps = 0;
  /// Unwrapped positions x(T), path-major, dim entries per path.
  std::vector<double> endpoints;
  /// (x(T) - x0) / T per path, same layout.
  std::vector<double> displacement;
  /// Occupation density of the wrapped position over t in [T/2, T],
  /// binned to the nearest node; integrates to one.
  ScalarField histogram;
};

/// Drift at an arbitrary (unwrapped) point by multilinear interpolation.
Coord interpolate_drift(const VectorField& drift, const Coord& x);

/// Throws StepTooLarge if dt > h / (2 max|v|).
PathEnsemble simulate(const CellSolution& solution, const SimulationConfig& config);

struct RotationEstimate {
  std::vector<double> mean;
  std::vector<double> standard_error;
};

RotationEstimate rotation_vector(const PathEnsemble& ensemble);

}  // namespace stochmather
