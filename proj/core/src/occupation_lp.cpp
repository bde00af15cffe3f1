#include "stochmather/occupation_lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stochmather/cell_solver.hpp"
#include "stochmather/error.hpp"

namespace stochmather {

namespace {

void check_velocity_box(const HamiltonianModel& model, const VelocityGrid& velocities, double sigma,
                        const Momentum& P, const LpOptions& options) {
  CellOptions cell;
  cell.tol = 1e-8;
  const CellSolution coarse = solve_cell(model, P, sigma, cell);
  const double needed = options.box_margin * coarse.drift.max_abs();
  if (velocities.v_max < needed) {
    throw Error(ErrorCode::velocity_box_too_small,
                "build_lp: v_max " + std::to_string(velocities.v_max) + " is below " +
                    std::to_string(needed) + " required by the coarse cell solve");
  }
}

}  // namespace

double DiscreteOccupationMeasure::total_mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

ScalarField DiscreteOccupationMeasure::x_marginal() const {
  ScalarField theta(grid);
  const std::size_t m = velocities.size();
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += weights[i * m + j];
    theta[i] = s / grid.cell_volume();
  }
  return theta;
}

double DiscreteOccupationMeasure::off_graph_mass(const VectorField& drift) const {
  const std::size_t m = velocities.size();
  const double reach = velocities.spacing() * (1.0 + 1e-9);
  double off = 0.0;
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double w = weights[i * m + j];
      if (w == 0.0) continue;
      const Coord v = velocities.node(j);
      double dist = 0.0;
      for (int a = 0; a < grid.dim(); ++a) dist = std::max(dist, std::abs(v[a] - drift(i, a)));
      if (dist > reach) off += w;
    }
  }
  return off;
}

LpInstance build_lp(const HamiltonianModel& model, const VelocityGrid& velocities, double sigma,
                    const Momentum& P, const LpOptions& options) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::sigma_zero_unsupported, "build_lp: sigma must be positive");
  }
  if (velocities.dim != model.dim() || P.dim() != model.dim()) {
    throw Error(ErrorCode::invalid_argument, "build_lp: dimension mismatch");
  }
  if (velocities.nodes_per_axis < 3 || !(velocities.v_max > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "build_lp: velocity box needs v_max > 0 and >= 3 nodes");
  }
  if (model.kind() == HamiltonianModel::Kind::tabulated && !(velocities == model.velocities())) {
    throw Error(ErrorCode::invalid_argument,
                "build_lp: tabulated models must use their own velocity grid");
  }
  if (options.check_box) check_velocity_box(model, velocities, sigma, P, options);

  const TorusGrid& grid = model.grid();
  const std::size_t N = grid.node_count();
  const std::size_t M = velocities.size();
  const int dim = grid.dim();

  LpInstance inst{grid, velocities, sigma, P, model.lagrangian_shift(), {}};
  LinearProgram& lp = inst.program;
  lp.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N * M));
  lp.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  lp.b[0] = 1.0;
  lp.c.resize(static_cast<Eigen::Index>(N * M));

  const double diffusion = 0.5 * sigma * sigma;
  for (std::size_t j = 0; j < M; ++j) {
    const Coord v = velocities.node(j);
    const std::span<const double> vs(v.data(), static_cast<std::size_t>(dim));
    double pv = 0.0;
    for (int a = 0; a < dim; ++a) pv += P[a] * v[a];
    for (std::size_t i = 0; i < N; ++i) {
      const auto col = static_cast<Eigen::Index>(inst.column(i, j));
      lp.A(0, col) = 1.0;
      drift_diffusion_row(grid, i, diffusion, vs, [&](std::size_t k, double value) {
        if (k != 0) lp.A(static_cast<Eigen::Index>(k), col) += value;
      });
      lp.c[col] = model.lagrangian(i, vs) + inst.shift + pv;
    }
  }
  return inst;
}

LpSolution solve_lp(const LpInstance& instance, const LpOptions& options) {
  const LinearProgram& raw = instance.program;
  // Scale each row to unit max-norm before pivoting.
  Eigen::VectorXd scale(raw.A.rows());
  LinearProgram scaled = raw;
  for (Eigen::Index r = 0; r < raw.A.rows(); ++r) {
    const double m = raw.A.row(r).cwiseAbs().maxCoeff();
    scale[r] = m > 0.0 ? 1.0 / m : 1.0;
    scaled.A.row(r) *= scale[r];
    scaled.b[r] *= scale[r];
  }
  SimplexOptions sopt;
  sopt.max_pivots = options.max_pivots;
  const SimplexResult res = solve_simplex(scaled, sopt);

  LpSolution out{0.0, 0.0, {instance.grid, instance.velocities, {}}, {}, ScalarField(instance.grid),
                 0.0, 0.0, 0.0, res.pivots};
  out.measure.weights.assign(res.x.data(), res.x.data() + res.x.size());
  for (double& w : out.measure.weights) w = std::max(w, 0.0);
  out.value = raw.c.dot(res.x);
  out.action_value = out.value - instance.shift;
  out.duals.resize(static_cast<std::size_t>(raw.A.rows()));
  for (Eigen::Index r = 0; r < raw.A.rows(); ++r) out.duals[static_cast<std::size_t>(r)] = res.y[r] * scale[r];
  for (std::size_t k = 1; k < instance.grid.node_count(); ++k) out.dual_potential[k] = -out.duals[k];

  out.gap = duality_gap(instance, out.value, out.duals);
  out.dual_infeasibility = dual_infeasibility(instance, out.duals);
  out.complementarity = complementarity_violation(instance, out.measure.weights, out.duals);
  return out;
}

double duality_gap(const LpInstance& instance, double primal_value, std::span<const double> duals) {
  double dual = 0.0;
  for (std::size_t r = 0; r < duals.size(); ++r) dual += instance.program.b[static_cast<Eigen::Index>(r)] * duals[r];
  return primal_value - dual;
}

double dual_infeasibility(const LpInstance& instance, std::span<const double> duals) {
  const LinearProgram& lp = instance.program;
  const Eigen::Map<const Eigen::VectorXd> y(duals.data(), static_cast<Eigen::Index>(duals.size()));
  const Eigen::VectorXd reduced = lp.c - lp.A.transpose() * y;
  return std::max(0.0, -reduced.minCoeff());
}

double complementarity_violation(const LpInstance& instance, std::span<const double> weights,
                                 std::span<const double> duals) {
  const LinearProgram& lp = instance.program;
  const Eigen::Map<const Eigen::VectorXd> y(duals.data(), static_cast<Eigen::Index>(duals.size()));
  const Eigen::VectorXd reduced = lp.c - lp.A.transpose() * y;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < reduced.size(); ++j) {
    worst = std::max(worst, weights[static_cast<std::size_t>(j)] * std::abs(reduced[j]));
  }
  return worst;
}

std::vector<double> uniform_rest_measure(const LpInstance& instance) {
  const std::size_t N = instance.grid.node_count();
  const std::size_t M = instance.velocities.size();
  std::size_t rest = 0;
  double best = INFINITY;
  for (std::size_t j = 0; j < M; ++j) {
    const Coord v = instance.velocities.node(j);
    const double n2 = v[0] * v[0] + v[1] * v[1];
    if (n2 < best) {
      best = n2;
      rest = j;
    }
  }
  std::vector<double> w(N * M, 0.0);
  for (std::size_t i = 0; i < N; ++i) w[instance.column(i, rest)] = 1.0 / static_cast<double>(N);
  return w;
}

}  // namespace stochmather
