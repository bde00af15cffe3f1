#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "stochmather/cell_solver.hpp"
#include "stochmather/error.hpp"
#include "stochmather/model_spec.hpp"
#include "stochmather/spectral.hpp"

using namespace stochmather;

namespace {

ScalarField cosine_V(int n, double c = 0.0) {
  return ScalarField::sample(TorusGrid(1, n), [c](const Coord& x) { return c + std::cos(2 * oracle::pi * x[0]); });
}

// σ⁴/2 Δ - σ²P ∇ (upwinded) + V + P²/2, assembled densely.
Eigen::MatrixXd dense_tilted(const ScalarField& V, double P, double sigma) {
  const int n = static_cast<int>(V.size());
  const double s2 = sigma * sigma;
  Eigen::MatrixXd M = oracle::generator_1d(n, 0.5 * s2 * s2, std::vector<double>(n, -s2 * P));
  for (int i = 0; i < n; ++i) M(i, i) += V[static_cast<std::size_t>(i)] + 0.5 * P * P;
  return M;
}

}  // namespace

TEST_CASE("constant eigenfunctions") {
  const ScalarField zero(TorusGrid(1, 32), 0.0);
  for (double sigma : {0.3, 1.0}) {
    const EigenSolution e0 = principal_eigenvalue(zero, Momentum{0.0}, sigma);
    CHECK(std::abs(e0.eigenvalue) <= 1e-10);
    const EigenSolution e1 = principal_eigenvalue(zero, Momentum{1.0}, sigma);
    CHECK(std::abs(e1.eigenvalue - 0.5) <= 1e-10);
    for (double v : e1.eigenfunction.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("dense eigendecomposition oracle") {
  SUBCASE("benchmark, n = 256") {
    const ScalarField V = cosine_V(256);
    const EigenSolution e = principal_eigenvalue(V, Momentum{0.0}, 1.0);
    CHECK(std::abs(e.eigenvalue - oracle::largest_real_eigenvalue(dense_tilted(V, 0.0, 1.0))) <= 1e-10);
    CHECK(e.residual <= 1e-9);
    CHECK(e.eigenfunction.min() > 0.0);
    CHECK(e.eigenfunction.max() == 1.0);
  }
  SUBCASE("tilted") {
    const ScalarField V = cosine_V(64);
    for (double P : {-1.0, 0.6}) {
      const EigenSolution e = principal_eigenvalue(V, Momentum{P}, 0.7);
      CHECK(std::abs(e.eigenvalue - oracle::largest_real_eigenvalue(dense_tilted(V, P, 0.7))) <= 1e-10);
    }
  }
  SUBCASE("matrix matches the dense assembly") {
    const ScalarField V = cosine_V(16);
    const Eigen::MatrixXd a = Eigen::MatrixXd(tilted_operator(V, Momentum{0.8}, 0.9));
    CHECK((a - dense_tilted(V, 0.8, 0.9)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("collatz-wielandt bracket is monotone") {
  const EigenSolution e = principal_eigenvalue(cosine_V(128), Momentum{0.3}, 0.6);
  REQUIRE(e.history.size() >= 2);
  for (std::size_t i = 1; i < e.history.size(); ++i) {
    CHECK(e.history[i].lower >= e.history[i - 1].lower - 1e-12);
    CHECK(e.history[i].upper <= e.history[i - 1].upper + 1e-12);
    CHECK(e.history[i].lower <= e.eigenvalue + 1e-10);
    CHECK(e.history[i].upper >= e.eigenvalue - 1e-10);
  }
}

TEST_CASE("potential shift moves the eigenvalue") {
  const double a = principal_eigenvalue(cosine_V(64), Momentum{0.5}, 0.8).eigenvalue;
  const double b = principal_eigenvalue(cosine_V(64, -3.25), Momentum{0.5}, 0.8).eigenvalue;
  CHECK(std::abs(b - a + 3.25) <= 1e-10);
}

TEST_CASE("corrector from the eigenfunction") {
  const ScalarField zero(TorusGrid(1, 16), 0.0);
  const ScalarField u0 = u_from_eigenfunction(principal_eigenvalue(zero, Momentum{0.0}, 1.0));
  CHECK(u0.max() <= 1e-12);

  const HamiltonianModel m = ModelSpec::cosine_potential().instantiate(TorusGrid(1, 256));
  const EigenSolution e = principal_eigenvalue(m.potential(), Momentum{0.0}, 1.0);
  const ScalarField u = u_from_eigenfunction(e);
  const CellSolution s = solve_cell(m, Momentum{0.0}, 1.0);
  double diff = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) diff = std::max(diff, std::abs(u[k] - s.u[k]));
  CHECK(diff <= 5e-3);
  CHECK(u.min() == 0.0);
  CHECK(cell_residual(m, Momentum{0.0}, 1.0, u, e.eigenvalue) <= 5e-3);
  CHECK(std::abs(e.eigenvalue - s.Hbar) <= 5e-3);
}

TEST_CASE("explicit theta") {
  const TorusGrid g(1, 64);
  const ScalarField t0 = explicit_theta(ScalarField(g, 0.0), Momentum{0.0}, 1.0);
  for (double v : t0.values()) CHECK(v == doctest::Approx(1.0));
  const auto u = ScalarField::sample(g, [](const Coord& x) { return 3.0 * x[0] * (1 - x[0]); });
  const ScalarField t = explicit_theta(u, Momentum{0.0}, 0.5);
  CHECK(t.min() > 0.0);
  CHECK(integrate(t) == doctest::Approx(1.0).epsilon(1e-14));
  try {
    (void)explicit_theta(u, Momentum{0.1}, 0.5);
    FAIL("expected NonzeroMomentum");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::nonzero_momentum);
  }
}
