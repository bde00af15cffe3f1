#pragma once

// Cross-route validation: cell problem, principal eigenvalue, stationary
// measure and identities, occupation LP, simulation and σ sweep, each judged
// against a configurable tolerance.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stochmather/diagnostics.hpp"
#include "stochmather/diffusion_sim.hpp"
#include "stochmather/model_spec.hpp"
#include "stochmather/serialization.hpp"
#include "stochmather/stationary_measure.hpp"

namespace stochmather {

struct Tolerances {
  double cell = 1e-8;              // cell residual and policy iteration stop
  double spectral = 1e-11;         // inverse iteration stop
  double lp = 1e-9;                // dual feasibility and complementarity
  double duality_gap = 1e-9;
  double route_spectral = 5e-3;    // |H̄_cell - λ|
  double route_lp = 5e-2;          // |LP action + H̄_cell| on the LP grid
  double route_simulation = 1e-1;  // |H̄ implied by the histogram - H̄_cell|
  double explicit_theta = 1e-2;    // relative L¹, P = 0 only
  double id1 = 1e-8;
  double id2 = 1e-3;
  double id3 = 1e-2;
  double dP = 1e-2;                // finite-difference step for D_P H̄
  double action = 5e-3;            // |∫(L + P·v)θ + H̄|
  double graph_mass = 5e-2;        // LP mass off the graph
  double dual_potential = 1e-1;    // sup|φ - u| after pinning node 0
  double lp_marginal = 5e-2;       // L¹ between LP x-marginal and θ
  double histogram = 1e-1;         // L¹ between occupation histogram and θ
  double rotation_stderr = 3.0;    // multiples of the standard error
  double sweep_limit = 5e-2;       // |H̄_{σ_min} - σ = 0 oracle|
  double ratio_variation = 2.0;    // max/min of est1 and of est2 ratios
  double est3_min = 0.1;
};

struct StageToggles {
  bool spectral = true;
  bool measure = true;
  bool regularity = true;
  bool lp = true;
  bool simulate = true;
  bool sweep = false;
};

struct RunConfig {
  ModelSpec model = ModelSpec::cosine_potential();
  std::string model_path;  // informational
  double sigma = 1.0;
  std::vector<double> P{0.0};
  int n = 256;
  int n_lp = 40;  // the LP runs on min(n, n_lp)
  int m = 41;
  double v_max = 4.0;
  Tolerances tol;
  std::uint64_t seed = 7;
  double horizon = 200.0;
  double dt = 1e-3;
  int paths = 256;
  unsigned threads = 0;
  std::vector<double> sweep_sigmas{1.0, 0.5, 0.25, 0.1, 0.05};
  int sweep_n = 512;
  std::vector<double> regularity_steps{0.05, 0.025, 0.0125};
  std::string out_dir;
  StageToggles stages;
};

Json encode(const RunConfig& cfg);
/// Missing keys keep the values already in `cfg`.
void apply_config(const Json& j, RunConfig& cfg);

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool at_least = false;  // value >= tolerance instead of value <= tolerance
  bool passed = false;
};

struct StageError {
  std::string stage;
  std::string code;
  std::string message;
};

struct RouteValues {
  double cell = 0.0;
  std::optional<double> spectral;
  std::optional<double> lp_action;       // LP value minus shift, comparable with -H̄
  std::optional<double> lp_grid_cell;    // H̄_cell on the LP grid
  std::optional<double> simulation;      // -∫ hist (L + P·v)
};

struct ValidationReport {
  Json config;
  RouteValues routes;
  std::vector<Check> checks;
  std::vector<StageError> errors;
  std::optional<IdentityReport> identities;
  std::optional<RegularityReport> regularity;
  std::optional<SigmaSweep> sweep;
  std::optional<RotationEstimate> rotation;
  std::optional<double> simulation_dt;
  bool passed = false;
};

Json encode(const ValidationReport& r);
ValidationReport decode_report(const Json& j);

/// Runs every enabled stage. Stage failures are recorded, never thrown.
/// Artifacts go to cfg.out_dir when it is non-empty.
ValidationReport run_validate(const RunConfig& cfg);

/// max/min of nonnegative values; 1 when all are (numerically) zero.
double ratio_spread(const std::vector<double>& values);

}  // namespace stochmather
