#include <cmath>

#include "doctest.h"
#include "stochmather/error.hpp"
#include "stochmather/validate.hpp"

using namespace stochmather;

namespace {

RunConfig small_free() {
  RunConfig cfg;
  cfg.model = ModelSpec::free_particle();
  cfg.sigma = 0.8;
  cfg.P = {0.6};
  cfg.n = 32;
  cfg.n_lp = 16;
  cfg.m = 41;
  cfg.horizon = 20.0;
  cfg.dt = 2e-3;
  cfg.paths = 16;
  cfg.sweep_n = 64;
  cfg.sweep_sigmas = {1.0, 0.5, 0.25};
  cfg.stages.sweep = true;
  return cfg;
}

}  // namespace

TEST_CASE("free particle: every route gives |P|^2/2") {
  const ValidationReport r = run_validate(small_free());
  CHECK(r.errors.empty());
  CHECK(r.passed);
  const double expect = 0.18;
  CHECK(std::abs(r.routes.cell - expect) <= 1e-9);
  REQUIRE(r.routes.spectral.has_value());
  CHECK(std::abs(*r.routes.spectral - expect) <= 1e-9);
  REQUIRE(r.routes.lp_action.has_value());
  CHECK(std::abs(*r.routes.lp_action + expect) <= 1e-9);
  REQUIRE(r.routes.simulation.has_value());
  CHECK(std::abs(*r.routes.simulation - expect) <= 1e-9);
  REQUIRE(r.rotation.has_value());
  CHECK(std::abs(r.rotation->mean[0] + 0.6) <= 3.0 * r.rotation->standard_error[0] + 1e-12);
  for (const Check& c : r.checks) CHECK_MESSAGE(c.passed, c.name);
}

TEST_CASE("reports are deterministic and round-trip") {
  RunConfig cfg = small_free();
  cfg.stages.sweep = false;
  const Json a = encode(run_validate(cfg));
  const Json b = encode(run_validate(cfg));
  CHECK(a.dump() == b.dump());
  CHECK(encode(decode_report(a)).dump() == a.dump());
}

TEST_CASE("failed checks are reported, not thrown") {
  RunConfig cfg = small_free();
  cfg.stages = {false, false, false, false, false, false};
  cfg.tol.cell = 1e-30;  // unattainable
  const ValidationReport r = run_validate(cfg);
  CHECK_FALSE(r.passed);
  bool failed_check = false;
  for (const Check& c : r.checks) failed_check = failed_check || !c.passed;
  CHECK((failed_check || !r.errors.empty()));
}

TEST_CASE("config keys") {
  RunConfig cfg;
  apply_config(Json::parse(R"({"sigma": 0.5, "P": [1.0], "n": 64, "paths": 8,
                               "stages": {"lp": false}, "tolerances": {"id2": 0.5}})"),
               cfg);
  CHECK(cfg.sigma == 0.5);
  CHECK(cfg.P == std::vector<double>{1.0});
  CHECK(cfg.n == 64);
  CHECK(cfg.paths == 8);
  CHECK_FALSE(cfg.stages.lp);
  CHECK(cfg.stages.spectral);
  CHECK(cfg.tol.id2 == 0.5);
  CHECK(cfg.tol.id1 == Tolerances{}.id1);

  RunConfig back;
  apply_config(encode(cfg), back);
  CHECK(encode(back) == encode(cfg));

  CHECK_THROWS_AS(apply_config(Json::parse(R"({"tolerances": {"id1": -1}})"), cfg), Error);
  CHECK_THROWS_AS(apply_config(Json::parse(R"({"sigma": "big"})"), cfg), Error);
}

TEST_CASE("ratio spread") {
  CHECK(ratio_spread({}) == 1.0);
  CHECK(ratio_spread({0.0, 0.0}) == 1.0);
  CHECK(ratio_spread({1.0, 2.0, 1.5}) == doctest::Approx(2.0));
}
