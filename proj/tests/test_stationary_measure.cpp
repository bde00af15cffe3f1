#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "stochmather/cell_solver.hpp"
#include "stochmather/model_spec.hpp"
#include "stochmather/spectral.hpp"
#include "stochmather/stationary_measure.hpp"

using namespace stochmather;

namespace {

HamiltonianModel cosine(int n) { return ModelSpec::cosine_potential().instantiate(TorusGrid(1, n)); }

double l1(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s * a.grid().cell_volume();
}

}  // namespace

TEST_CASE("uniform densities") {
  const TorusGrid g(1, 32);
  for (double sigma : {0.2, 1.0}) {
    const StationaryDensity d0 = invariant_density(VectorField(g, 0.0), sigma);
    const StationaryDensity dc = invariant_density(VectorField(g, -1.7), sigma);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      CHECK(d0.theta[k] == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(dc.theta[k] == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  const TorusGrid g2(2, 12);
  const StationaryDensity d2 = invariant_density(VectorField(g2, 0.4), 0.5);
  CHECK(d2.theta.max() - d2.theta.min() <= 1e-10);
}

TEST_CASE("dense kernel oracle") {
  const int n = 64;
  const TorusGrid g(1, n);
  std::vector<double> b(n);
  VectorField v(g);
  for (int i = 0; i < n; ++i) {
    b[i] = 1.5 * std::sin(2 * oracle::pi * i / n) + 0.3 * std::cos(6 * oracle::pi * i / n) - 0.2;
    v(static_cast<std::size_t>(i), 0) = b[i];
  }
  const StationaryDensity d = invariant_density(v, 0.6);
  const Eigen::VectorXd want = oracle::stationary_1d(oracle::generator_1d(n, 0.18, b));
  for (int i = 0; i < n; ++i) CHECK(d.theta[static_cast<std::size_t>(i)] == doctest::Approx(want[i]).epsilon(1e-9));
  CHECK(integrate(d.theta) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.theta.min() >= 0.0);

  SUBCASE("exact adjoint: integral of the generator vanishes") {
    for (int trial = 0; trial < 5; ++trial) {
      const auto phi = ScalarField::sample(g, [trial](const Coord& x) { return std::exp(std::sin(2 * oracle::pi * (trial + 1) * x[0] + trial)); });
      const ScalarField Aphi = generator_apply(v, 0.6, phi);
      double scale = 0.0;
      for (double a : Aphi.values()) scale = std::max(scale, std::abs(a));
      CHECK(std::abs(integrate(Aphi, d.theta)) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("graph measure and action") {
  const HamiltonianModel free = ModelSpec::free_particle().instantiate(TorusGrid(1, 32));
  const GraphMeasure g0 = mather_measure(free, solve_cell(free, Momentum{0.0}, 0.5));
  for (double t : g0.density.theta.values()) CHECK(t == doctest::Approx(1.0));
  CHECK(g0.velocity_on_graph.max_abs() == 0.0);
  const GraphMeasure g1 = mather_measure(free, solve_cell(free, Momentum{1.0}, 0.5));
  for (double v : g1.velocity_on_graph.values()) CHECK(v == -1.0);
  CHECK(g1.action == doctest::Approx(-0.5));

  const HamiltonianModel m = cosine(256);
  const CellSolution s = solve_cell(m, Momentum{0.0}, 1.0);
  const GraphMeasure gm = mather_measure(m, s);
  CHECK(std::abs(gm.action + s.Hbar) <= 5e-3);
  CHECK(l1(gm.density.theta, explicit_theta(s.u, s.P, 1.0)) <= 1e-2);
  CHECK(gm.density.residual <= 1e-8);
  SUBCASE("velocity on the graph is the cell drift") {
    for (std::size_t k = 0; k < m.grid().node_count(); ++k) CHECK(gm.velocity_on_graph(k, 0) == s.drift(k, 0));
  }
}

TEST_CASE("identities") {
  SUBCASE("free particle") {
    const HamiltonianModel free = ModelSpec::free_particle().instantiate(TorusGrid(1, 32));
    const CellSolution s = solve_cell(free, Momentum{1.0}, 0.5);
    const IdentityReport r = check_identities(free, s, invariant_density(s.drift, 0.5), 1e-2);
    CHECK(r.id2_err == 0.0);
    CHECK(r.id1_err <= 1e-8);
    CHECK(r.id3_gap <= 1e-8);
  }
  SUBCASE("benchmark at P = 0") {
    const HamiltonianModel m = cosine(256);
    const CellSolution s = solve_cell(m, Momentum{0.0}, 1.0);
    const IdentityReport r = check_identities(m, s, invariant_density(s.drift, 1.0), 1e-2);
    CHECK(r.id1_err <= 1e-8);
    CHECK(r.id2_err <= 1e-3);
    CHECK(r.id3_gap <= 1e-2);
  }
  SUBCASE("tilted benchmark") {
    const HamiltonianModel m = cosine(256);
    const CellSolution s = solve_cell(m, Momentum{1.0}, 0.8);
    const IdentityReport r = check_identities(m, s, invariant_density(s.drift, 0.8), 1e-2);
    CHECK(r.id3_gap <= 1e-2);
    CHECK(r.id1_err <= 1e-8);
    CHECK(r.mean_dpH.size() == 1);
  }
  SUBCASE("fourier basis size") {
    CHECK(fourier_test_basis(TorusGrid(2, 16), 5).size() == 20);
    CHECK(fourier_test_basis(TorusGrid(1, 16), 5).size() == 10);
  }
}
