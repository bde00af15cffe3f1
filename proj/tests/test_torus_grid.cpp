#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "stochmather/error.hpp"
#include "stochmather/torus_grid.hpp"

using namespace stochmather;

namespace {
constexpr double kPi = std::numbers::pi;

double sup_rel_error(const ScalarField& got, const ScalarField& want) {
  double err = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    err = std::max(err, std::abs(got[k] - want[k]));
    scale = std::max(scale, std::abs(want[k]));
  }
  return err / scale;
}
}  // namespace

TEST_CASE("grid geometry") {
  const TorusGrid g(2, 16);
  CHECK(g.node_count() == 256);
  CHECK(g.spacing() * g.nodes_per_axis() == 1.0);
  CHECK(g.index({-1, 17}) == g.index({15, 1}));
  CHECK(g.neighbor(g.index({15, 3}), 0, +1) == g.index({0, 3}));
  CHECK_THROWS_AS(TorusGrid(3, 16), Error);
  CHECK_THROWS_AS(TorusGrid(1, 7), Error);
}

TEST_CASE("laplacian") {
  const TorusGrid g(1, 256);
  SUBCASE("constants are harmonic") {
    const ScalarField lap = laplacian(ScalarField(g, 3.7));
    for (double v : lap.values()) CHECK(v == 0.0);
  }
  SUBCASE("cosine") {
    const auto f = ScalarField::sample(g, [](const Coord& x) { return std::cos(2 * kPi * x[0]); });
    const auto want =
        ScalarField::sample(g, [](const Coord& x) { return -4 * kPi * kPi * std::cos(2 * kPi * x[0]); });
    CHECK(sup_rel_error(laplacian(f), want) <= 1e-2);
  }
  SUBCASE("one-hot stencil") {
    const TorusGrid s(1, 8);
    ScalarField e(s);
    e[0] = 1.0;
    const ScalarField lap = laplacian(e);
    const double h2 = s.spacing() * s.spacing();
    CHECK(lap[7] == doctest::Approx(1.0 / h2));
    CHECK(lap[0] == doctest::Approx(-2.0 / h2));
    CHECK(lap[1] == doctest::Approx(1.0 / h2));
    CHECK(lap[3] == 0.0);
  }
  SUBCASE("integrates to zero") {
    const TorusGrid g2(2, 12);
    const auto f = ScalarField::sample(g2, [](const Coord& x) { return std::exp(std::sin(7 * x[0]) + x[1] * x[1]); });
    const double bound = 1e-12 * f.max() / (g2.spacing() * g2.spacing());
    CHECK(std::abs(integrate(laplacian(f))) <= bound);
  }
}

TEST_CASE("gradient") {
  const TorusGrid g(1, 256);
  SUBCASE("constant") {
    const VectorField d = gradient(ScalarField(g, 2.0));
    CHECK(d.max_abs() == 0.0);
  }
  SUBCASE("sine, centered") {
    const auto f = ScalarField::sample(g, [](const Coord& x) { return std::sin(2 * kPi * x[0]); });
    const VectorField d = gradient(f);
    ScalarField got(g);
    for (std::size_t k = 0; k < g.node_count(); ++k) got[k] = d(k, 0);
    const auto want = ScalarField::sample(g, [](const Coord& x) { return 2 * kPi * std::cos(2 * kPi * x[0]); });
    CHECK(sup_rel_error(got, want) <= 1e-2);
  }
  SUBCASE("sawtooth ramp: seam carries the jump") {
    const TorusGrid s(1, 8);
    const auto f = ScalarField::sample(s, [](const Coord& x) { return x[0]; });
    const ScalarField fwd = forward_difference(f, 0);
    for (std::size_t k = 0; k + 1 < s.node_count(); ++k) CHECK(fwd[k] == doctest::Approx(1.0));
    CHECK(fwd[7] == doctest::Approx((0.0 - 7.0 / 8.0) * 8.0));
  }
  SUBCASE("upwind follows the drift sign") {
    const TorusGrid s(1, 8);
    const auto f = ScalarField::sample(s, [](const Coord& x) { return x[0] * x[0]; });
    VectorField w(s);
    w(2, 0) = 1.0;
    w(3, 0) = -1.0;
    const VectorField up = gradient(f, w);
    CHECK(up(2, 0) == doctest::Approx(forward_difference(f, 0)[2]));
    CHECK(up(3, 0) == doctest::Approx(backward_difference(f, 0)[3]));
    CHECK(up(4, 0) == doctest::Approx(gradient(f)(4, 0)));
  }
  SUBCASE("centered gradient integrates to zero") {
    const TorusGrid g2(2, 10);
    const auto f = ScalarField::sample(g2, [](const Coord& x) { return std::cos(3 * x[0]) * x[1]; });
    const VectorField d = gradient(f);
    for (int a = 0; a < 2; ++a) {
      double s = 0.0;
      for (std::size_t k = 0; k < g2.node_count(); ++k) s += d(k, a);
      CHECK(std::abs(s) <= 1e-10);
    }
  }
}

TEST_CASE("shift") {
  const TorusGrid g(1, 8);
  const auto f = ScalarField::sample(g, [](const Coord& x) { return 1.0 + 8.0 * x[0]; });
  CHECK(shift(f, {0, 0}).values()[3] == f[3]);
  const ScalarField full = shift(f, {8, 0});
  for (std::size_t k = 0; k < 8; ++k) CHECK(full[k] == f[k]);
  const ScalarField one = shift(f, {1, 0});
  CHECK(one[0] == 2.0);
  CHECK(one[7] == 1.0);
  SUBCASE("commutes with the laplacian") {
    const TorusGrid g2(2, 9);
    const auto h = ScalarField::sample(g2, [](const Coord& x) { return std::sin(5 * x[0] + 2 * x[1] * x[1]); });
    const ScalarField a = laplacian(shift(h, {2, -3}));
    const ScalarField b = shift(laplacian(h), {2, -3});
    for (std::size_t k = 0; k < g2.node_count(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
  }
}

TEST_CASE("integrate") {
  const TorusGrid g(1, 64);
  CHECK(integrate(ScalarField(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  const auto s = ScalarField::sample(g, [](const Coord& x) { return std::sin(2 * kPi * x[0]); });
  CHECK(std::abs(integrate(s)) <= 1e-12);
  const auto theta = ScalarField::sample(g, [](const Coord& x) { return 1.0 + 0.5 * std::cos(2 * kPi * x[0]); });
  CHECK(integrate(ScalarField(g, 1.0), theta) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("drift-diffusion matrix is a rate matrix") {
  const TorusGrid g(2, 8);
  VectorField v(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    v(k, 0) = std::sin(static_cast<double>(k));
    v(k, 1) = std::cos(3.0 * static_cast<double>(k));
  }
  const auto m = drift_diffusion_matrix(g, 0.3, v);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (decltype(m)::InnerIterator it(m, r); it; ++it) {
      if (it.col() != r) CHECK(it.value() >= 0.0);
      sum += it.value();
    }
    CHECK(std::abs(sum) <= 1e-10);
  }
}

TEST_CASE("csv") {
  const TorusGrid g(2, 8);
  std::ostringstream s;
  write_csv(s, ScalarField(g, 1.5), "u");
  const std::string text = s.str();
  CHECK(text.rfind("x,y,u\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 65);
}
