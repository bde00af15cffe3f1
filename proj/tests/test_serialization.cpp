#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "stochmather/error.hpp"
#include "stochmather/serialization.hpp"

using namespace stochmather;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const char* base = std::getenv("SM_TEST_TMP");
  fs::path dir = base != nullptr ? fs::path(base) : fs::temp_directory_path() / "stochmather_tests";
  fs::create_directories(dir);
  return dir / name;
}

// Encoding the decoded document must reproduce it bit for bit.
template <class Decode>
void round_trip(const Json& j, Decode decode) {
  const Json again = encode(decode(j));
  CHECK(again == j);
  CHECK(again.dump() == j.dump());
}

struct Fixture {
  ModelSpec spec = ModelSpec::cosine_potential();
  HamiltonianModel model = spec.instantiate(TorusGrid(1, 32));
  CellSolution sol = solve_cell(model, Momentum{0.3}, 0.7);
  StationaryDensity dens = invariant_density(sol.drift, 0.7);
};

}  // namespace

TEST_CASE("fields and momenta") {
  const TorusGrid g(2, 8);
  const auto f = ScalarField::sample(g, [](const Coord& x) { return std::sin(7.0 * x[0]) / 3.0 + x[1]; });
  round_trip(encode(f), decode_scalar);
  VectorField v(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) v(k, 1) = 0.1 * static_cast<double>(k);
  round_trip(encode(v), decode_vector);
  round_trip(encode(g), decode_grid);
  round_trip(encode(Momentum{-1.0 / 3.0, 2.0}), decode_momentum);
  const ScalarField back = decode_scalar(encode(f));
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(back[k] == f[k]);
}

TEST_CASE("solver results") {
  Fixture fx;
  const Json cell = encode(CellRecord{fx.spec, fx.sol});
  round_trip(cell, decode_cell);
  const CellRecord rec = decode_cell(cell);
  CHECK(rec.solution.Hbar == fx.sol.Hbar);
  CHECK(rec.instantiate().grid() == fx.model.grid());

  round_trip(encode(principal_eigenvalue(fx.model.potential(), Momentum{0.3}, 0.7)), decode_eigen);
  round_trip(encode(fx.dens), decode_density);
  round_trip(encode(check_identities(fx.model, fx.sol, fx.dens, 1e-2)), decode_identities);

  const HamiltonianModel small = fx.spec.instantiate(TorusGrid(1, 8));
  const LpSolution lp = solve_lp(build_lp(small, VelocityGrid{1, 4.0, 9}, 0.7, Momentum{0.3}));
  round_trip(encode(lp), decode_lp);
  CHECK(decode_lp(encode(lp)).measure.weights == lp.measure.weights);

  SimulationConfig sc;
  sc.horizon = 1.0;
  sc.dt = 1e-2;
  sc.paths = 3;
  round_trip(encode(simulate(fx.sol, sc)), decode_ensemble);

  round_trip(encode(regularity_report(fx.model, fx.sol, fx.dens)), decode_regularity);
  round_trip(encode(sigma_sweep(fx.model, Momentum{0.0}, {1.0, 0.5})), decode_sweep);
}

TEST_CASE("document envelope") {
  const Json d = document("thing", {{"a", 1}});
  CHECK(d.at("format_version") == kFormatVersion);
  CHECK_NOTHROW(require_document(d, "thing"));
  CHECK_THROWS_AS(require_document(d, "other"), Error);
  Json wrong = d;
  wrong["format_version"] = kFormatVersion + 1;
  CHECK_THROWS_AS(require_document(wrong, "thing"), Error);
  CHECK_THROWS_AS(decode_scalar(encode(Momentum{1.0})), Error);
}

TEST_CASE("files") {
  const fs::path p = scratch("field.json");
  const ScalarField f(TorusGrid(1, 8), 0.25);
  write_json(p, encode(f));
  CHECK(read_json(p) == encode(f));

  const fs::path c = scratch("field.csv");
  export_csv(c, f, "u");
  std::ifstream in(c);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "x,u");
  CHECK(first == "0,0.25");
  int rows = 1;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 8);

  try {
    (void)read_json(scratch("missing") / "nope.json");
    FAIL("expected io_failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io_failure);
    CHECK(std::string(e.what()).find("nope.json") != std::string::npos);
  }
  write_text(scratch("bad.json"), "{not json");
  CHECK_THROWS_AS(read_json(scratch("bad.json")), Error);
  // Parent directories are created, but not underneath a regular file.
  write_json(scratch("nested") / "deeper" / "x.json", Json::object());
  CHECK(fs::exists(scratch("nested") / "deeper" / "x.json"));
  CHECK_THROWS_AS(write_json(scratch("field.csv") / "x.json", Json::object()), Error);
}
