#include "stochmather/stationary_measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/SparseLU>

#include "stochmather/error.hpp"

namespace stochmather {

StationaryDensity invariant_density(const VectorField& drift, double sigma, double tol) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "invariant_density: sigma must be positive");
  const TorusGrid& g = drift.grid();
  const auto n = static_cast<Eigen::Index>(g.node_count());
  const Eigen::SparseMatrix<double, Eigen::RowMajor> gen = generator_matrix(drift, sigma);

  // Rows of Aᵀ with row 0 replaced by the normalization h^dim Σθ = 1.
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(gen.nonZeros()) + g.node_count());
  for (Eigen::Index k = 0; k < gen.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gen, k); it; ++it) {
      if (it.col() != 0) t.emplace_back(it.col(), it.row(), it.value());
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) t.emplace_back(0, k, g.cell_volume());
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[0] = 1.0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::singular_beyond_nullity,
                "invariant_density: adjoint generator has a null space of dimension > 1; refine the grid");
  }
  Eigen::VectorXd theta = lu.solve(rhs);
  if (!theta.allFinite()) {
    throw Error(ErrorCode::singular_beyond_nullity, "invariant_density: adjoint solve failed");
  }

  const double floor = -1e-12 * theta.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (theta[k] < floor) {
      throw Error(ErrorCode::negative_density,
                  "invariant_density: negative density " + std::to_string(theta[k]) + " at node " +
                      std::to_string(k));
    }
    theta[k] = std::max(theta[k], 0.0);
  }
  theta /= theta.sum() * g.cell_volume();

  const Eigen::VectorXd adj = gen.transpose() * theta;
  const double residual = adj.cwiseAbs().maxCoeff();
  if (!(residual <= tol * std::max(1.0, theta.cwiseAbs().maxCoeff() * std::abs(gen.coeff(0, 0))))) {
    throw Error(ErrorCode::singular_beyond_nullity,
                "invariant_density: adjoint residual " + std::to_string(residual) + " exceeds tolerance");
  }
  ScalarField field(g, std::vector<double>(theta.data(), theta.data() + n));
  return StationaryDensity{std::move(field), drift, sigma, residual};
}

double tilted_action(const HamiltonianModel& model, const Momentum& P, const VectorField& drift,
                     const ScalarField& theta) {
  const TorusGrid& g = drift.grid();
  ScalarField cost(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const std::span<const double> v = drift.at(k);
    double pv = 0.0;
    for (int a = 0; a < g.dim(); ++a) pv += P[a] * v[a];
    cost[k] = model.lagrangian(k, v) + pv;
  }
  return integrate(cost, theta);
}

GraphMeasure mather_measure(const HamiltonianModel& model, const CellSolution& solution, double tol) {
  StationaryDensity density = invariant_density(solution.drift, solution.sigma, tol);
  const double action = tilted_action(model, solution.P, solution.drift, density.theta);
  return GraphMeasure{std::move(density), solution.drift, action};
}

std::vector<ScalarField> fourier_test_basis(const TorusGrid& grid, int max_wavenumber) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<ScalarField> basis;
  for (int a = 0; a < grid.dim(); ++a) {
    for (int k = 1; k <= max_wavenumber; ++k) {
      basis.push_back(ScalarField::sample(grid, [=](const Coord& x) { return std::cos(two_pi * k * x[a]); }));
      basis.push_back(ScalarField::sample(grid, [=](const Coord& x) { return std::sin(two_pi * k * x[a]); }));
    }
  }
  return basis;
}

IdentityReport check_identities(const HamiltonianModel& model, const CellSolution& solution,
                                const StationaryDensity& density, double dP, const CellOptions& options) {
  if (!(dP > 0.0)) throw Error(ErrorCode::invalid_argument, "check_identities: dP must be positive");
  const TorusGrid& g = model.grid();
  const ScalarField& theta = density.theta;
  IdentityReport report;

  for (const ScalarField& phi : fourier_test_basis(g)) {
    const double value = integrate(generator_apply(density.drift, density.sigma, phi), theta);
    report.id1_err = std::max(report.id1_err, std::abs(value));
  }

  for (int a = 0; a < g.dim(); ++a) {
    ScalarField dxh(g);
    ScalarField dph(g);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      dxh[k] = model.dx_hamiltonian(k, density.drift.at(k))[a];
      dph[k] = -density.drift(k, a);
    }
    report.id2_err = std::max(report.id2_err, std::abs(integrate(dxh, theta)));

    const double mean = integrate(dph, theta);
    const CellSolution plus = solve_cell(model, solution.P.displaced(a, dP), solution.sigma, options, &solution.u);
    const CellSolution minus = solve_cell(model, solution.P.displaced(a, -dP), solution.sigma, options, &solution.u);
    const double fd = (plus.Hbar - minus.Hbar) / (2.0 * dP);
    report.mean_dpH.push_back(mean);
    report.hbar_derivative.push_back(fd);
    report.id3_gap = std::max(report.id3_gap, std::abs(mean - fd));
  }
  return report;
}

}  // namespace stochmather
