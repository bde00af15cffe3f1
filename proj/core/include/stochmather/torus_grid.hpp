#pragma once

// Uniform periodic grids on the unit torus [0,1)^dim and the discrete
// calculus (differences, Laplacian, shifts, quadrature) built on them.

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

namespace stochmather {

/// Point or index pair on a grid of dimension 1 or 2; unused entries are 0.
using Coord = std::array<double, 2>;
using Offset = std::array<int, 2>;

class TorusGrid {
 public:
  static constexpr int kMinNodes = 8;

  TorusGrid(int dim, int nodes_per_axis);

  int dim() const noexcept { return dim_; }
  int nodes_per_axis() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  std::size_t node_count() const noexcept { return count_; }
  /// h^dim, the weight of one node in the rectangle rule.
  double cell_volume() const noexcept { return volume_; }

  /// Wraps each component modulo nodes_per_axis.
  std::size_t index(Offset multi) const noexcept;
  Offset multi_index(std::size_t node) const noexcept;
  std::size_t neighbor(std::size_t node, int axis, int offset) const noexcept;
  std::size_t shifted(std::size_t node, Offset offset) const noexcept;
  Coord coordinates(std::size_t node) const noexcept;

  bool operator==(const TorusGrid&) const = default;

 private:
  int dim_;
  int n_;
  double h_;
  std::size_t count_;
  double volume_;
};

class ScalarField {
 public:
  explicit ScalarField(const TorusGrid& grid, double fill = 0.0);
  ScalarField(const TorusGrid& grid, std::vector<double> values);

  /// Samples f at every node; f receives the node coordinates.
  static ScalarField sample(const TorusGrid& grid,
                            const std::function<double(const Coord&)>& f);

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t node) const noexcept { return values_[node]; }
  double& operator[](std::size_t node) noexcept { return values_[node]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double max() const;
  double min() const;

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

/// dim components per node, stored node-major.
class VectorField {
 public:
  explicit VectorField(const TorusGrid& grid, double fill = 0.0);
  VectorField(const TorusGrid& grid, std::vector<double> components);

  const TorusGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return grid_.dim(); }
  double operator()(std::size_t node, int axis) const noexcept {
    return values_[node * static_cast<std::size_t>(grid_.dim()) + axis];
  }
  double& operator()(std::size_t node, int axis) noexcept {
    return values_[node * static_cast<std::size_t>(grid_.dim()) + axis];
  }
  std::span<const double> at(std::size_t node) const noexcept {
    return {values_.data() + node * grid_.dim(), static_cast<std::size_t>(grid_.dim())};
  }
  std::span<const double> values() const noexcept { return values_; }

  /// Largest |component| over all nodes and axes.
  double max_abs() const noexcept;

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

ScalarField laplacian(const ScalarField& f);

/// Centered differences.
VectorField gradient(const ScalarField& f);

/// Upwind by drift sign: forward difference where the drift component is
/// positive, backward where negative, centered at exact zeros.
VectorField gradient(const ScalarField& f, const VectorField& drift);

ScalarField forward_difference(const ScalarField& f, int axis);
ScalarField backward_difference(const ScalarField& f, int axis);

/// Circular shift: result(x) = f(x + offset·h).
ScalarField shift(const ScalarField& f, Offset offset);

/// Rectangle rule h^dim Σ f (· weight).
double integrate(const ScalarField& f);
double integrate(const ScalarField& f, const ScalarField& weight);

/// Sparse matrix of the operator a·Δ_h + b·∇_h with b upwinded per axis.
/// Off-diagonals are nonnegative and rows sum to zero, so the matrix is the
/// rate matrix of a continuous-time Markov chain on the grid nodes.
Eigen::SparseMatrix<double, Eigen::RowMajor> drift_diffusion_matrix(
    const TorusGrid& grid, double diffusion, const VectorField& drift);

/// Stencil coefficients of one row of drift_diffusion_matrix, emitted through
/// `emit(column, value)`; the diagonal is emitted last.
template <class Emit>
void drift_diffusion_row(const TorusGrid& grid, std::size_t node, double diffusion,
                         std::span<const double> drift, Emit&& emit) {
  const double h = grid.spacing();
  const double d = diffusion / (h * h);
  double diag = 0.0;
  for (int a = 0; a < grid.dim(); ++a) {
    const double b = drift[a];
    double up = d;
    double down = d;
    if (b > 0.0) {
      up += b / h;
    } else if (b < 0.0) {
      down += -b / h;
    }
    emit(grid.neighbor(node, a, +1), up);
    emit(grid.neighbor(node, a, -1), down);
    diag -= up + down;
  }
  emit(node, diag);
}

/// One row per node: coordinates then value(s).
void write_csv(std::ostream& out, const ScalarField& f, const char* value_name = "value");
void write_csv(std::ostream& out, const VectorField& f, const char* value_name = "v");

}  // namespace stochmather
