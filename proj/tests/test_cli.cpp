#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "stochmather/serialization.hpp"

using namespace stochmather;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const char* base = std::getenv("SM_TEST_TMP");
  fs::path dir = base != nullptr ? fs::path(base) : fs::temp_directory_path() / "stochmather_cli";
  fs::create_directories(dir);
  return dir;
}

struct Run {
  int code;
  Json out;
  std::string raw;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  Run r{code, Json(), out.str()};
  if (!r.raw.empty()) r.out = Json::parse(r.raw);
  return r;
}

std::string write_model(const char* name, const Json& j) {
  const fs::path p = tmp_dir() / name;
  write_json(p, j);
  return p.string();
}

std::string free_model() { return write_model("free.json", ModelSpec::free_particle()); }

}  // namespace

TEST_CASE("cell, measure and simulate chain through files") {
  const std::string cell = (tmp_dir() / "cell.json").string();
  Run r = run({"cell", "--model", free_model(), "--sigma", "0.5", "--P=-1.5", "--n", "32", "--out", cell});
  REQUIRE(r.code == 0);
  CHECK(r.out.at("Hbar").get<double>() == doctest::Approx(1.125).epsilon(1e-12));

  r = run({"measure", "--cell", cell, "--identities"});
  REQUIRE(r.code == 0);
  CHECK(r.out.at("action").get<double>() == doctest::Approx(-1.125).epsilon(1e-9));
  CHECK(r.out.at("identities").contains("id1_err"));

  r = run({"simulate", "--cell", cell, "--T", "10", "--dt", "1e-2", "--paths", "8", "--seed", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.out.at("steps") == 1000);
  CHECK(r.out.at("rotation_mean")[0].get<double>() > 0.0);
}

TEST_CASE("spectral, lp and sweep") {
  Run r = run({"spectral", "--sigma", "1", "--n", "64"});
  REQUIRE(r.code == 0);
  CHECK(r.out.at("eigenvalue").get<double>() > 0.0);

  r = run({"lp", "--model", free_model(), "--n", "8", "--m", "9", "--vmax", "2", "--P", "0.5"});
  REQUIRE(r.code == 0);
  CHECK(r.out.at("action_value").get<double>() == doctest::Approx(-0.125).epsilon(1e-9));
  CHECK(r.out.at("gap").get<double>() <= 1e-9);

  r = run({"sweep", "--n", "64", "--sigmas", "1,0.5,0.25"});
  REQUIRE(r.code == 0);
  CHECK(r.out.at("entries").size() == 3);
  r = run({"sweep", "--n", "64", "--sigmas", "0.5,1"});
  CHECK(r.code == 2);
  CHECK(r.out.at("error").at("code") == "InvalidArgument");
}

TEST_CASE("malformed model") {
  const std::string bad = write_model("bad.json", Json{{"format_version", 1}, {"kind", "mechanical"}, {"dim", 3}});
  Run r = run({"cell", "--model", bad});
  CHECK(r.code != 0);
  CHECK(r.out.at("error").at("code") == "InvalidModel");

  r = run({"cell", "--model", (tmp_dir() / "absent.json").string()});
  CHECK(r.code != 0);
  CHECK(r.out.contains("error"));

  Json table = ModelSpec::free_particle();
  table["kind"] = "tabulated";
  table["velocity_nodes"] = 5;
  table["table"] = Json::array();
  for (int k = 0; k < 8; ++k) table["table"].push_back({1.0, 0.0, 0.0, 0.0, 1.0});  // not convex
  r = run({"cell", "--model", write_model("concave.json", table), "--n", "8"});
  CHECK(r.code != 0);
  CHECK(r.out.contains("error"));
}

TEST_CASE("config file and flag precedence") {
  const fs::path cfg = tmp_dir() / "cfg.json";
  write_json(cfg, Json{{"sigma", 0.5}, {"P", {2.0}}, {"n", 32}, {"model_path", free_model()}});
  Run r = run({"cell", "--config", cfg.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.at("Hbar").get<double>() == doctest::Approx(2.0));
  CHECK(r.out.at("n") == 32);
  r = run({"cell", "--config", cfg.string(), "--P", "1", "--n", "16"});
  REQUIRE(r.code == 0);
  CHECK(r.out.at("Hbar").get<double>() == doctest::Approx(0.5));
  CHECK(r.out.at("n") == 16);
  CHECK(r.out.at("sigma") == 0.5);
}

TEST_CASE("validate exit codes and output directory") {
  const fs::path dir = tmp_dir() / "validate_out";
  fs::remove_all(dir);
  ::setenv("SM_OUT_DIR", dir.string().c_str(), 1);
  Run r = run({"validate", "--model", free_model(), "--n", "16", "--sigma", "1", "--P", "0.5", "--T", "50",
               "--dt", "2e-3", "--paths", "16"});
  ::unsetenv("SM_OUT_DIR");
  CHECK(r.code == 0);
  CHECK(r.out.at("passed") == true);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(read_json(dir / "report.json") == r.out);

  r = run({"validate", "--n", "4"});
  CHECK(r.code == 2);
}

TEST_CASE("usage errors") {
  std::ostringstream out, err;
  CHECK(cli::run_cli({}, out, err) != 0);
  CHECK(cli::run_cli({"cell", "--bogus"}, out, err) != 0);
  CHECK(cli::run_cli({"--help"}, out, err) == 0);
}
