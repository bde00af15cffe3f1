#pragma once

// Lagrangian L(x,v), its Legendre transform H(p,x) = sup_v (-p·v - L(x,v)),
// the optimal velocity v = -D_pH and the controlled generator
// A^v φ = σ²/2 Δφ + v·∇φ.
//
// Sign conventions are fixed here. All values returned by HamiltonianModel
// are in the caller's (unshifted) convention; lagrangian_shift() is the
// constant that makes L + shift >= 0 and is applied only where a
// nonnegative running cost is required (occupation LP).

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "stochmather/torus_grid.hpp"

namespace stochmather {

/// Average-momentum parameter P of the tilted cell problem.
class Momentum {
 public:
  Momentum() = default;
  explicit Momentum(std::vector<double> components);
  Momentum(std::initializer_list<double> components);

  int dim() const noexcept { return static_cast<int>(p_.size()); }
  double operator[](int axis) const noexcept { return p_[axis]; }
  std::span<const double> values() const noexcept { return p_; }
  double norm_squared() const noexcept;
  double norm() const noexcept;

  /// P + step·e_axis.
  Momentum displaced(int axis, double step) const;

  bool operator==(const Momentum&) const = default;

 private:
  std::vector<double> p_;
};

/// Box [-v_max, v_max]^dim with nodes_per_axis nodes per axis, endpoints
/// included. Nodes are indexed with axis 0 running slowest so that index
/// order is lexicographic order of the velocities.
struct VelocityGrid {
  int dim = 1;
  double v_max = 1.0;
  int nodes_per_axis = 3;

  double spacing() const noexcept { return 2.0 * v_max / (nodes_per_axis - 1); }
  std::size_t size() const noexcept;
  double coordinate(int i) const noexcept {
    return v_max * (2.0 * i - (nodes_per_axis - 1)) / (nodes_per_axis - 1);
  }
  Coord node(std::size_t j) const noexcept;
  bool on_boundary(std::size_t j) const noexcept;
  /// Index of the node within 1e-9·Δv of v, or size() if none.
  std::size_t locate(std::span<const double> v) const noexcept;

  bool operator==(const VelocityGrid&) const = default;
};

/// One control choice of the upwind scheme at a node: the velocity and the
/// discrete Hamiltonian cost L(x,v) + P·v + Σ_a v_a D^{sgn v_a}_a u.
struct ControlChoice {
  Coord velocity{0.0, 0.0};
  double cost = 0.0;
  /// Velocity-node index for tabulated models; unused for mechanical ones.
  std::size_t velocity_index = 0;
};

class HamiltonianModel {
 public:
  enum class Kind { mechanical, tabulated };

  /// L(x,v) = |v|²/2 - V(x), H(p,x) = |p|²/2 + V(x).
  static HamiltonianModel mechanical(ScalarField potential);

  /// table holds L(x_k, v_j) at index k·velocities.size() + j. Strict
  /// convexity is checked at load: every second difference in v along each
  /// axis must be at least convexity_modulus.
  static HamiltonianModel tabulated(const TorusGrid& grid, const VelocityGrid& velocities,
                                    std::vector<double> table, double convexity_modulus);

  Kind kind() const noexcept { return kind_; }
  const TorusGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return grid_.dim(); }

  /// Constant c = -min L, so that L + c >= 0 with equality somewhere.
  double lagrangian_shift() const noexcept { return shift_; }
  /// Declared lower bound γ_L on D²_vv L.
  double convexity_modulus() const noexcept { return gamma_; }
  /// Upper bound Γ on D²_pp H implied by γ_L.
  double hamiltonian_convexity_bound() const noexcept { return 1.0 / gamma_; }
  /// max_x |D_x L| over the data (|∇V| for mechanical models).
  double x_lipschitz() const noexcept { return x_lipschitz_; }

  /// Mechanical only.
  const ScalarField& potential() const;
  /// Tabulated only.
  const VelocityGrid& velocities() const;

  double lagrangian(std::size_t node, std::span<const double> v) const;
  double hamiltonian(std::span<const double> p, std::size_t node) const;
  Coord optimal_velocity(std::span<const double> p, std::size_t node) const;

  /// Minimizer of the discrete Hamiltonian cost at `node` given one-sided
  /// differences of u. Ties go to the lexicographically smaller velocity.
  ControlChoice upwind_control(std::size_t node, const Momentum& P,
                               std::span<const double> forward,
                               std::span<const double> backward) const;

  /// Cost of a fixed control under the same discrete Hamiltonian.
  double control_cost(std::size_t node, const Momentum& P, const ControlChoice& control,
                      std::span<const double> forward,
                      std::span<const double> backward) const;

  /// D_x H(p,x) at the optimal velocity v, i.e. -D_x L(x,v), by centered
  /// differences in x.
  Coord dx_hamiltonian(std::size_t node, std::span<const double> v) const;

 private:
  HamiltonianModel(Kind kind, const TorusGrid& grid) : kind_(kind), grid_(grid) {}

  double table_at(std::size_t node, std::size_t j) const noexcept {
    return table_[node * velocities_.size() + j];
  }

  Kind kind_;
  TorusGrid grid_;
  double shift_ = 0.0;
  double gamma_ = 1.0;
  double x_lipschitz_ = 0.0;
  std::optional<ScalarField> potential_;
  std::optional<VectorField> potential_gradient_;
  VelocityGrid velocities_;
  std::vector<double> table_;
};

/// A^v φ = σ²/2 Δ_h φ + v·∇_h φ with the upwind gradient of v.
ScalarField generator_apply(const VectorField& drift, double sigma, const ScalarField& phi);

/// Matrix form of generator_apply: row k holds the stencil of A^v at node k.
Eigen::SparseMatrix<double, Eigen::RowMajor> generator_matrix(const VectorField& drift,
                                                              double sigma);

}  // namespace stochmather
