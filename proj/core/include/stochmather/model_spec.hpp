#pragma once

// Grid-independent description of a HamiltonianModel, as read from a model
// definition file. A spec is instantiated on a concrete TorusGrid.
//
// {
//   "format_version": 1,
//   "kind": "mechanical" | "tabulated",
//   "dim": 1,
//   "potential": {"constant": 0.0,
//                 "modes": [{"k": [1], "cos": 1.0, "sin": 0.0}]}
//              | {"samples": [...]},          // fixed grid, nodes_per_axis^dim values
//   // tabulated only:
//   "v_max": 4.0, "velocity_nodes": 41, "gamma_L": 1.0,
//   "table": [[L(x_0,v_0), ...], ...]        // optional; default L = |v|²/2 - V(x)
// }

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "stochmather/model.hpp"

namespace stochmather {

struct FourierMode {
  Offset wavenumber{0, 0};
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

/// V(x) = constant + Σ cos_coeff·cos(2π k·x) + sin_coeff·sin(2π k·x), or
/// explicit nodal samples tied to one grid size.
struct PotentialSpec {
  double constant = 0.0;
  std::vector<FourierMode> modes;
  std::optional<std::vector<double>> samples;

  ScalarField sample(const TorusGrid& grid) const;
};

struct ModelSpec {
  HamiltonianModel::Kind kind = HamiltonianModel::Kind::mechanical;
  int dim = 1;
  PotentialSpec potential;
  double v_max = 4.0;
  int velocity_nodes = 41;
  double convexity_modulus = 1.0;
  /// Rows per x-node; if absent the table is generated from the potential.
  std::optional<std::vector<std::vector<double>>> table;

  HamiltonianModel instantiate(const TorusGrid& grid) const;

  /// Convenience constructors used by tests and the CLI defaults.
  static ModelSpec cosine_potential(double amplitude = 1.0, double constant = 0.0);
  static ModelSpec free_particle(int dim = 1);
};

void to_json(nlohmann::json& j, const ModelSpec& spec);
void from_json(const nlohmann::json& j, ModelSpec& spec);

}  // namespace stochmather
