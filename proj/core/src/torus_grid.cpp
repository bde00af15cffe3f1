#include "stochmather/torus_grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "stochmather/error.hpp"

namespace stochmather {

namespace {

int wrap(int i, int n) noexcept {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* what) {
  if (!(a == b)) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + ": fields live on different grids");
  }
}

}  // namespace

TorusGrid::TorusGrid(int dim, int nodes_per_axis) : dim_(dim), n_(nodes_per_axis) {
  if (dim != 1 && dim != 2) {
    throw Error(ErrorCode::invalid_argument, "TorusGrid: dim must be 1 or 2");
  }
  if (nodes_per_axis < kMinNodes) {
    throw Error(ErrorCode::invalid_argument, "TorusGrid: nodes_per_axis must be >= 8");
  }
  h_ = 1.0 / n_;
  count_ = dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
  volume_ = dim_ == 1 ? h_ : h_ * h_;
}

std::size_t TorusGrid::index(Offset multi) const noexcept {
  const auto i0 = static_cast<std::size_t>(wrap(multi[0], n_));
  if (dim_ == 1) return i0;
  return i0 + static_cast<std::size_t>(n_) * static_cast<std::size_t>(wrap(multi[1], n_));
}

Offset TorusGrid::multi_index(std::size_t node) const noexcept {
  const auto n = static_cast<std::size_t>(n_);
  if (dim_ == 1) return {static_cast<int>(node), 0};
  return {static_cast<int>(node % n), static_cast<int>(node / n)};
}

std::size_t TorusGrid::neighbor(std::size_t node, int axis, int offset) const noexcept {
  Offset m = multi_index(node);
  m[axis] += offset;
  return index(m);
}

std::size_t TorusGrid::shifted(std::size_t node, Offset offset) const noexcept {
  Offset m = multi_index(node);
  m[0] += offset[0];
  if (dim_ == 2) m[1] += offset[1];
  return index(m);
}

Coord TorusGrid::coordinates(std::size_t node) const noexcept {
  const Offset m = multi_index(node);
  return {m[0] * h_, dim_ == 2 ? m[1] * h_ : 0.0};
}

ScalarField::ScalarField(const TorusGrid& grid, double fill)
    : grid_(grid), values_(grid.node_count(), fill) {}

ScalarField::ScalarField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.node_count()) {
    throw Error(ErrorCode::invalid_argument, "ScalarField: value count does not match grid");
  }
}

ScalarField ScalarField::sample(const TorusGrid& grid,
                                const std::function<double(const Coord&)>& f) {
  ScalarField out(grid);
  for (std::size_t k = 0; k < grid.node_count(); ++k) out[k] = f(grid.coordinates(k));
  return out;
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

VectorField::VectorField(const TorusGrid& grid, double fill)
    : grid_(grid), values_(grid.node_count() * grid.dim(), fill) {}

VectorField::VectorField(const TorusGrid& grid, std::vector<double> components)
    : grid_(grid), values_(std::move(components)) {
  if (values_.size() != grid_.node_count() * grid_.dim()) {
    throw Error(ErrorCode::invalid_argument, "VectorField: component count does not match grid");
  }
}

double VectorField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField laplacian(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  ScalarField out(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    double acc = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      acc += f[g.neighbor(k, a, +1)] - 2.0 * f[k] + f[g.neighbor(k, a, -1)];
    }
    out[k] = acc * inv_h2;
  }
  return out;
}

VectorField gradient(const ScalarField& f) {
  const TorusGrid& g = f.grid();
  const double inv_2h = 0.5 / g.spacing();
  VectorField out(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    for (int a = 0; a < g.dim(); ++a) {
      out(k, a) = (f[g.neighbor(k, a, +1)] - f[g.neighbor(k, a, -1)]) * inv_2h;
    }
  }
  return out;
}

VectorField gradient(const ScalarField& f, const VectorField& drift) {
  const TorusGrid& g = f.grid();
  require_same_grid(g, drift.grid(), "gradient");
  const double inv_h = 1.0 / g.spacing();
  VectorField out(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    for (int a = 0; a < g.dim(); ++a) {
      const double b = drift(k, a);
      if (b > 0.0) {
        out(k, a) = (f[g.neighbor(k, a, +1)] - f[k]) * inv_h;
      } else if (b < 0.0) {
        out(k, a) = (f[k] - f[g.neighbor(k, a, -1)]) * inv_h;
      } else {
        out(k, a) = (f[g.neighbor(k, a, +1)] - f[g.neighbor(k, a, -1)]) * 0.5 * inv_h;
      }
    }
  }
  return out;
}

ScalarField forward_difference(const ScalarField& f, int axis) {
  const TorusGrid& g = f.grid();
  const double inv_h = 1.0 / g.spacing();
  ScalarField out(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    out[k] = (f[g.neighbor(k, axis, +1)] - f[k]) * inv_h;
  }
  return out;
}

ScalarField backward_difference(const ScalarField& f, int axis) {
  const TorusGrid& g = f.grid();
  const double inv_h = 1.0 / g.spacing();
  ScalarField out(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    out[k] = (f[k] - f[g.neighbor(k, axis, -1)]) * inv_h;
  }
  return out;
}

ScalarField shift(const ScalarField& f, Offset offset) {
  const TorusGrid& g = f.grid();
  ScalarField out(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) out[k] = f[g.shifted(k, offset)];
  return out;
}

double integrate(const ScalarField& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += v;
  return acc * f.grid().cell_volume();
}

double integrate(const ScalarField& f, const ScalarField& weight) {
  require_same_grid(f.grid(), weight.grid(), "integrate");
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) acc += f[k] * weight[k];
  return acc * f.grid().cell_volume();
}

Eigen::SparseMatrix<double, Eigen::RowMajor> drift_diffusion_matrix(
    const TorusGrid& grid, double diffusion, const VectorField& drift) {
  require_same_grid(grid, drift.grid(), "drift_diffusion_matrix");
  const auto n = static_cast<Eigen::Index>(grid.node_count());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(grid.node_count() * (2 * grid.dim() + 1));
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    drift_diffusion_row(grid, k, diffusion, drift.at(k), [&](std::size_t col, double value) {
      triplets.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(col), value);
    });
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

void write_csv(std::ostream& out, const ScalarField& f, const char* value_name) {
  const TorusGrid& g = f.grid();
  out << (g.dim() == 1 ? "x" : "x,y") << ',' << value_name << '\n';
  out.precision(17);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Coord c = g.coordinates(k);
    out << c[0];
    if (g.dim() == 2) out << ',' << c[1];
    out << ',' << f[k] << '\n';
  }
}

void write_csv(std::ostream& out, const VectorField& f, const char* value_name) {
  const TorusGrid& g = f.grid();
  out << (g.dim() == 1 ? "x" : "x,y");
  for (int a = 0; a < g.dim(); ++a) out << ',' << value_name << a;
  out << '\n';
  out.precision(17);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const Coord c = g.coordinates(k);
    out << c[0];
    if (g.dim() == 2) out << ',' << c[1];
    for (int a = 0; a < g.dim(); ++a) out << ',' << f(k, a);
    out << '\n';
  }
}

}  // namespace stochmather
