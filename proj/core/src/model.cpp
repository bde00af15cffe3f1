#include "stochmather/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stochmather/error.hpp"

namespace stochmather {

namespace {

void require_finite(std::span<const double> p) {
  for (double v : p) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "Momentum: non-finite entry");
  }
}

double dot(std::span<const double> a, const Coord& b, int dim) {
  double acc = 0.0;
  for (int i = 0; i < dim; ++i) acc += a[i] * b[i];
  return acc;
}

// Σ_a v_a D^{sgn v_a}_a u, with D the one-sided difference selected by the
// sign of v_a (no transport at v_a = 0).
double upwind_transport(const Coord& v, std::span<const double> forward,
                        std::span<const double> backward, int dim) {
  double acc = 0.0;
  for (int a = 0; a < dim; ++a) {
    if (v[a] > 0.0) {
      acc += v[a] * forward[a];
    } else if (v[a] < 0.0) {
      acc += v[a] * backward[a];
    }
  }
  return acc;
}

}  // namespace

Momentum::Momentum(std::vector<double> components) : p_(std::move(components)) {
  require_finite(p_);
}

Momentum::Momentum(std::initializer_list<double> components) : p_(components) {
  require_finite(p_);
}

double Momentum::norm_squared() const noexcept {
  double acc = 0.0;
  for (double v : p_) acc += v * v;
  return acc;
}

double Momentum::norm() const noexcept { return std::sqrt(norm_squared()); }

Momentum Momentum::displaced(int axis, double step) const {
  std::vector<double> q = p_;
  q.at(static_cast<std::size_t>(axis)) += step;
  return Momentum(std::move(q));
}

std::size_t VelocityGrid::size() const noexcept {
  const auto m = static_cast<std::size_t>(nodes_per_axis);
  return dim == 1 ? m : m * m;
}

Coord VelocityGrid::node(std::size_t j) const noexcept {
  if (dim == 1) return {coordinate(static_cast<int>(j)), 0.0};
  const auto m = static_cast<std::size_t>(nodes_per_axis);
  return {coordinate(static_cast<int>(j / m)), coordinate(static_cast<int>(j % m))};
}

bool VelocityGrid::on_boundary(std::size_t j) const noexcept {
  const auto m = static_cast<std::size_t>(nodes_per_axis);
  auto edge = [&](std::size_t i) { return i == 0 || i + 1 == m; };
  if (dim == 1) return edge(j);
  return edge(j / m) || edge(j % m);
}

std::size_t VelocityGrid::locate(std::span<const double> v) const noexcept {
  const double dv = spacing();
  std::size_t j = 0;
  for (int a = 0; a < dim; ++a) {
    const double s = (v[a] + v_max) / dv;
    const double r = std::round(s);
    if (std::abs(s - r) > 1e-9 || r < 0 || r > nodes_per_axis - 1) return size();
    j = j * static_cast<std::size_t>(nodes_per_axis) + static_cast<std::size_t>(r);
  }
  return j;
}

HamiltonianModel HamiltonianModel::mechanical(ScalarField potential) {
  HamiltonianModel m(Kind::mechanical, potential.grid());
  for (double v : potential.values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_model, "mechanical model: non-finite potential");
  }
  m.shift_ = potential.max();
  m.gamma_ = 1.0;
  VectorField grad = gradient(potential);
  double lip = 0.0;
  for (std::size_t k = 0; k < grad.grid().node_count(); ++k) {
    double s = 0.0;
    for (int a = 0; a < grad.dim(); ++a) s += grad(k, a) * grad(k, a);
    lip = std::max(lip, std::sqrt(s));
  }
  m.x_lipschitz_ = lip;
  m.potential_gradient_ = std::move(grad);
  m.potential_ = std::move(potential);
  return m;
}

HamiltonianModel HamiltonianModel::tabulated(const TorusGrid& grid, const VelocityGrid& velocities,
                                             std::vector<double> table, double convexity_modulus) {
  if (velocities.dim != grid.dim()) {
    throw Error(ErrorCode::invalid_model, "tabulated model: velocity box dimension differs from grid");
  }
  if (velocities.nodes_per_axis < 3 || !(velocities.v_max > 0.0)) {
    throw Error(ErrorCode::invalid_model, "tabulated model: need v_max > 0 and at least 3 velocity nodes");
  }
  if (!(convexity_modulus > 0.0)) {
    throw Error(ErrorCode::invalid_model, "tabulated model: convexity modulus must be positive");
  }
  const std::size_t nv = velocities.size();
  if (table.size() != grid.node_count() * nv) {
    throw Error(ErrorCode::invalid_model, "tabulated model: table size must be nodes x velocities");
  }
  HamiltonianModel m(Kind::tabulated, grid);
  m.velocities_ = velocities;
  m.gamma_ = convexity_modulus;
  m.table_ = std::move(table);

  double lmin = std::numeric_limits<double>::infinity();
  for (double v : m.table_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_model, "tabulated model: non-finite entry");
    lmin = std::min(lmin, v);
  }
  m.shift_ = -lmin;

  // Convexity spot check along each velocity axis.
  const int mv = velocities.nodes_per_axis;
  const double dv2 = velocities.spacing() * velocities.spacing();
  const double slack = 1e-9 * (1.0 + std::abs(lmin));
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    for (std::size_t j = 0; j < nv; ++j) {
      for (int a = 0; a < velocities.dim; ++a) {
        const std::size_t stride = (velocities.dim == 2 && a == 0) ? static_cast<std::size_t>(mv) : 1;
        const int i = velocities.dim == 1 ? static_cast<int>(j)
                                          : (a == 0 ? static_cast<int>(j / mv) : static_cast<int>(j % mv));
        if (i == 0 || i == mv - 1) continue;
        const double second =
            (m.table_at(k, j + stride) - 2.0 * m.table_at(k, j) + m.table_at(k, j - stride)) / dv2;
        if (second < convexity_modulus - slack / dv2) {
          throw Error(ErrorCode::invalid_model,
                      "tabulated model: second difference in v below declared convexity modulus at node " +
                          std::to_string(k));
        }
      }
    }
  }

  double lip = 0.0;
  const double inv_2h = 0.5 / grid.spacing();
  for (std::size_t k = 0; k < grid.node_count(); ++k) {
    for (std::size_t j = 0; j < nv; ++j) {
      double s = 0.0;
      for (int a = 0; a < grid.dim(); ++a) {
        const double d = (m.table_at(grid.neighbor(k, a, +1), j) - m.table_at(grid.neighbor(k, a, -1), j)) * inv_2h;
        s += d * d;
      }
      lip = std::max(lip, std::sqrt(s));
    }
  }
  m.x_lipschitz_ = lip;
  return m;
}

const ScalarField& HamiltonianModel::potential() const {
  if (!potential_) throw Error(ErrorCode::invalid_argument, "potential() requires a mechanical model");
  return *potential_;
}

const VelocityGrid& HamiltonianModel::velocities() const {
  if (kind_ != Kind::tabulated) throw Error(ErrorCode::invalid_argument, "velocities() requires a tabulated model");
  return velocities_;
}

double HamiltonianModel::lagrangian(std::size_t node, std::span<const double> v) const {
  if (kind_ == Kind::mechanical) {
    double s = 0.0;
    for (int a = 0; a < dim(); ++a) s += v[a] * v[a];
    return 0.5 * s - (*potential_)[node];
  }
  const std::size_t j = velocities_.locate(v);
  if (j == velocities_.size()) {
    throw Error(ErrorCode::invalid_argument, "tabulated lagrangian: velocity is not a table node");
  }
  return table_at(node, j);
}

double HamiltonianModel::hamiltonian(std::span<const double> p, std::size_t node) const {
  if (kind_ == Kind::mechanical) {
    double s = 0.0;
    for (int a = 0; a < dim(); ++a) s += p[a] * p[a];
    return 0.5 * s + (*potential_)[node];
  }
  const Coord v = optimal_velocity(p, node);
  return -dot(p, v, dim()) - table_at(node, velocities_.locate(v));
}

Coord HamiltonianModel::optimal_velocity(std::span<const double> p, std::size_t node) const {
  if (kind_ == Kind::mechanical) {
    Coord v{0.0, 0.0};
    for (int a = 0; a < dim(); ++a) v[a] = -p[a];
    return v;
  }
  // Index order is lexicographic, so keeping the first strict maximum breaks
  // ties toward the smaller velocity.
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < velocities_.size(); ++j) {
    const double value = -dot(p, velocities_.node(j), dim()) - table_at(node, j);
    if (value > best_value) {
      best_value = value;
      best = j;
    }
  }
  if (velocities_.on_boundary(best)) {
    throw Error(ErrorCode::argmax_on_boundary,
                "Legendre transform maximizer lies on the velocity box boundary; enlarge v_max");
  }
  return velocities_.node(best);
}

ControlChoice HamiltonianModel::upwind_control(std::size_t node, const Momentum& P,
                                               std::span<const double> forward,
                                               std::span<const double> backward) const {
  ControlChoice out;
  if (kind_ == Kind::mechanical) {
    // L = |v|²/2 - V separates by axis; on v_a > 0 the cost is
    // v_a²/2 + (P_a + D⁺u) v_a, on v_a < 0 it is v_a²/2 + (P_a + D⁻u) v_a.
    double cost = -(*potential_)[node];
    for (int a = 0; a < dim(); ++a) {
      const double pf = P[a] + forward[a];
      const double pb = P[a] + backward[a];
      const double v_up = pf < 0.0 ? -pf : 0.0;
      const double v_down = pb > 0.0 ? -pb : 0.0;
      const double c_up = -0.5 * v_up * v_up;
      const double c_down = -0.5 * v_down * v_down;
      if (c_down <= c_up) {
        out.velocity[a] = v_down;
        cost += c_down;
      } else {
        out.velocity[a] = v_up;
        cost += c_up;
      }
    }
    out.cost = cost;
    return out;
  }

  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < velocities_.size(); ++j) {
    const Coord v = velocities_.node(j);
    const double c = table_at(node, j) + dot(P.values(), v, dim()) +
                     upwind_transport(v, forward, backward, dim());
    if (c < best_cost) {
      best_cost = c;
      best = j;
    }
  }
  if (velocities_.on_boundary(best)) {
    throw Error(ErrorCode::argmax_on_boundary,
                "optimal control lies on the velocity box boundary; enlarge v_max");
  }
  out.velocity = velocities_.node(best);
  out.cost = best_cost;
  out.velocity_index = best;
  return out;
}

double HamiltonianModel::control_cost(std::size_t node, const Momentum& P,
                                      const ControlChoice& control,
                                      std::span<const double> forward,
                                      std::span<const double> backward) const {
  const double running = kind_ == Kind::mechanical
                             ? lagrangian(node, std::span<const double>(control.velocity.data(), dim()))
                             : table_at(node, control.velocity_index);
  return running + dot(P.values(), control.velocity, dim()) +
         upwind_transport(control.velocity, forward, backward, dim());
}

Coord HamiltonianModel::dx_hamiltonian(std::size_t node, std::span<const double> v) const {
  Coord out{0.0, 0.0};
  if (kind_ == Kind::mechanical) {
    for (int a = 0; a < dim(); ++a) out[a] = (*potential_gradient_)(node, a);
    return out;
  }
  const std::size_t j = velocities_.locate(v);
  if (j == velocities_.size()) {
    throw Error(ErrorCode::invalid_argument, "dx_hamiltonian: velocity is not a table node");
  }
  const double inv_2h = 0.5 / grid_.spacing();
  for (int a = 0; a < dim(); ++a) {
    out[a] = -(table_at(grid_.neighbor(node, a, +1), j) - table_at(grid_.neighbor(node, a, -1), j)) * inv_2h;
  }
  return out;
}

ScalarField generator_apply(const VectorField& drift, double sigma, const ScalarField& phi) {
  ScalarField lap = laplacian(phi);
  const VectorField grad = gradient(phi, drift);
  const double half_s2 = 0.5 * sigma * sigma;
  for (std::size_t k = 0; k < lap.size(); ++k) {
    double transport = 0.0;
    for (int a = 0; a < drift.dim(); ++a) transport += drift(k, a) * grad(k, a);
    lap[k] = half_s2 * lap[k] + transport;
  }
  return lap;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> generator_matrix(const VectorField& drift, double sigma) {
  return drift_diffusion_matrix(drift.grid(), 0.5 * sigma * sigma, drift);
}

}  // namespace stochmather
