#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "stochmather/cell_solver.hpp"
#include "stochmather/diagnostics.hpp"
#include "stochmather/diffusion_sim.hpp"
#include "stochmather/error.hpp"
#include "stochmather/occupation_lp.hpp"
#include "stochmather/serialization.hpp"
#include "stochmather/spectral.hpp"
#include "stochmather/stationary_measure.hpp"
#include "stochmather/validate.hpp"

namespace stochmather::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;  // validation ran but some check failed
constexpr int kExitError = 2;    // a stage could not run

// Flag values; only flags actually given override the config file.
struct Flags {
  std::string config;
  std::string model;
  double sigma = 0.0;
  std::vector<double> P;
  int n = 0;
  double tol = 0.0;
  std::string out;
  std::string csv;
  int m = 0;
  double vmax = 0.0;
  std::string cell;
  bool identities = false;
  double dP = 0.0;
  double T = 0.0;
  double dt = 0.0;
  int paths = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::vector<double> sigmas;
  bool sweep = false;
  bool no_lp = false;
  bool no_simulate = false;
};

struct Registered {
  CLI::Option* model = nullptr;
  CLI::Option* sigma = nullptr;
  CLI::Option* P = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* tol = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* m = nullptr;
  CLI::Option* vmax = nullptr;
  CLI::Option* dP = nullptr;
  CLI::Option* T = nullptr;
  CLI::Option* dt = nullptr;
  CLI::Option* paths = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* sigmas = nullptr;
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

std::optional<fs::path> env_out_dir() {
  if (const char* d = std::getenv("SM_OUT_DIR"); d != nullptr && *d != '\0') return fs::path(d);
  return std::nullopt;
}

// Explicit --out, else $SM_OUT_DIR/<fallback>, else nothing.
std::optional<fs::path> output_path(const std::string& out, const char* fallback) {
  if (!out.empty()) return fs::path(out);
  if (auto d = env_out_dir()) return *d / fallback;
  return std::nullopt;
}

ModelSpec load_model(const std::string& path) {
  Json j;
  try {
    j = read_json(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::invalid_model, e.what());
  }
  try {
    return j.get<ModelSpec>();
  } catch (const Error& e) {
    throw Error(ErrorCode::invalid_model, path + ": " + e.what());
  }
}

// Config file first, then flags.
RunConfig resolve(const Flags& f, const Registered& r) {
  RunConfig cfg;
  Json file_cfg = Json::object();
  if (!f.config.empty()) {
    file_cfg = read_json(f.config);
    apply_config(file_cfg, cfg);
  }
  if (given(r.model)) cfg.model_path = f.model;
  if (!cfg.model_path.empty()) cfg.model = load_model(cfg.model_path);
  if (given(r.sigma)) cfg.sigma = f.sigma;
  if (given(r.P)) cfg.P = f.P;
  if (given(r.n)) cfg.n = f.n;
  if (given(r.tol)) cfg.tol.cell = f.tol;
  if (given(r.out)) cfg.out_dir = f.out;
  if (given(r.m)) cfg.m = f.m;
  if (given(r.vmax)) cfg.v_max = f.vmax;
  if (given(r.dP)) cfg.tol.dP = f.dP;
  if (given(r.T)) cfg.horizon = f.T;
  if (given(r.dt)) cfg.dt = f.dt;
  if (given(r.paths)) cfg.paths = f.paths;
  if (given(r.seed)) cfg.seed = f.seed;
  if (given(r.threads)) cfg.threads = f.threads;
  if (given(r.sigmas)) cfg.sweep_sigmas = f.sigmas;
  if (!(cfg.tol.cell > 0.0) || !(cfg.tol.dP > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "tolerances must be positive");
  }
  return cfg;
}

std::string cell_path(const Flags& f, const Json& file_cfg) {
  if (!f.cell.empty()) return f.cell;
  if (file_cfg.contains("cell")) return file_cfg.at("cell").get<std::string>();
  throw Error(ErrorCode::invalid_argument, "--cell is required");
}

Json error_json(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

int cmd_cell(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const HamiltonianModel model = cfg.model.instantiate(TorusGrid(cfg.model.dim, cfg.n));
  CellOptions opt;
  opt.tol = cfg.tol.cell;
  const CellSolution sol = solve_cell(model, Momentum(cfg.P), cfg.sigma, opt);
  if (auto p = output_path(f.out, "cell.json")) write_json(*p, encode(CellRecord{cfg.model, sol}));
  if (!f.csv.empty()) export_csv(f.csv, sol.u, "u");
  out << Json{{"P", cfg.P},
              {"sigma", sol.sigma},
              {"Hbar", sol.Hbar},
              {"residual", sol.residual},
              {"iterations", sol.iterations},
              {"used_fallback", sol.used_fallback},
              {"n", cfg.n}}
             .dump(2)
      << '\n';
  return 0;
}

int cmd_spectral(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const HamiltonianModel model = cfg.model.instantiate(TorusGrid(cfg.model.dim, cfg.n));
  if (model.kind() != HamiltonianModel::Kind::mechanical) {
    throw Error(ErrorCode::invalid_model, "spectral: requires a mechanical model");
  }
  const EigenSolution eig = principal_eigenvalue(model.potential(), Momentum(cfg.P), cfg.sigma);
  if (auto p = output_path(f.out, "spectral.json")) write_json(*p, encode(eig));
  if (!f.csv.empty()) export_csv(f.csv, eig.eigenfunction, "psi");
  out << Json{{"P", cfg.P},
              {"sigma", eig.sigma},
              {"eigenvalue", eig.eigenvalue},
              {"residual", eig.residual},
              {"iterations", eig.iterations},
              {"n", cfg.n}}
             .dump(2)
      << '\n';
  return 0;
}

int cmd_measure(const RunConfig& cfg, const Flags& f, const Json& file_cfg, std::ostream& out) {
  const CellRecord rec = decode_cell(read_json(cell_path(f, file_cfg)));
  const HamiltonianModel model = rec.instantiate();
  const GraphMeasure gm = mather_measure(model, rec.solution, cfg.tol.cell);
  if (auto p = output_path(f.out, "density.json")) write_json(*p, encode(gm.density));
  if (!f.csv.empty()) export_csv(f.csv, gm.density.theta, "theta");
  Json summary{{"sigma", gm.density.sigma},
               {"residual", gm.density.residual},
               {"action", gm.action},
               {"Hbar", rec.solution.Hbar}};
  if (f.identities || file_cfg.value("identities", false)) {
    CellOptions opt;
    opt.tol = cfg.tol.cell;
    summary["identities"] = encode(check_identities(model, rec.solution, gm.density, cfg.tol.dP, opt));
  }
  out << summary.dump(2) << '\n';
  return 0;
}

int cmd_lp(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const HamiltonianModel model = cfg.model.instantiate(TorusGrid(cfg.model.dim, cfg.n));
  VelocityGrid vel{cfg.model.dim, cfg.v_max, cfg.m};
  if (model.kind() == HamiltonianModel::Kind::tabulated) vel = model.velocities();
  const Momentum P(cfg.P);
  const LpInstance inst = build_lp(model, vel, cfg.sigma, P);
  const LpSolution lp = solve_lp(inst);
  if (auto p = output_path(f.out, "lp.json")) write_json(*p, encode(lp));
  if (!f.csv.empty()) export_csv(f.csv, lp.measure.x_marginal(), "theta");
  std::size_t support = 0;
  for (double w : lp.measure.weights) support += w > 0.0 ? 1 : 0;
  out << Json{{"value", lp.value},
              {"action_value", lp.action_value},
              {"shift", inst.shift},
              {"gap", lp.gap},
              {"complementarity", lp.complementarity},
              {"dual_infeasibility", lp.dual_infeasibility},
              {"pivots", lp.pivots},
              {"variables", lp.measure.weights.size()},
              {"constraints", inst.program.A.rows()},
              {"support", support}}
             .dump(2)
      << '\n';
  return 0;
}

int cmd_simulate(const RunConfig& cfg, const Flags& f, const Json& file_cfg, std::ostream& out) {
  const CellRecord rec = decode_cell(read_json(cell_path(f, file_cfg)));
  SimulationConfig sc;
  sc.horizon = cfg.horizon;
  sc.dt = cfg.dt;
  sc.paths = cfg.paths;
  sc.seed = cfg.seed;
  sc.threads = cfg.threads;
  const PathEnsemble ens = simulate(rec.solution, sc);
  if (auto p = output_path(f.out, "ensemble.json")) write_json(*p, encode(ens));
  if (!f.csv.empty()) export_csv(f.csv, ens.histogram, "density");
  Json summary{{"steps", ens.steps}, {"paths", sc.paths}, {"seed", sc.seed}};
  if (sc.paths >= 2) {
    const RotationEstimate rot = rotation_vector(ens);
    summary["rotation_mean"] = rot.mean;
    summary["rotation_standard_error"] = rot.standard_error;
  }
  out << summary.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const Flags& f, std::ostream& out) {
  const HamiltonianModel model = cfg.model.instantiate(TorusGrid(cfg.model.dim, cfg.n));
  CellOptions opt;
  opt.tol = cfg.tol.cell;
  const SigmaSweep sw = sigma_sweep(model, Momentum(cfg.P), cfg.sweep_sigmas, opt);
  if (auto p = output_path(f.out, "sweep.json")) write_json(*p, encode(sw));
  if (!f.csv.empty()) export_csv(f.csv, sw);
  out << encode(sw).dump(2) << '\n';
  return 0;
}

int cmd_validate(RunConfig cfg, const Flags& f, std::ostream& out) {
  if (cfg.out_dir.empty()) {
    if (auto d = env_out_dir()) cfg.out_dir = d->string();
  }
  if (f.sweep) cfg.stages.sweep = true;
  if (f.no_lp) cfg.stages.lp = false;
  if (f.no_simulate) cfg.stages.simulate = false;
  const ValidationReport report = run_validate(cfg);
  out << encode(report).dump(2) << '\n';
  if (!report.errors.empty()) return kExitError;
  return report.passed ? 0 : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Effective Hamiltonians, stationary measures and occupation LPs on the torus",
               "stochmather"};
  app.require_subcommand(1);
  Flags f;
  Registered reg;

  auto common = [&](CLI::App* sub, bool with_model) {
    sub->add_option("--config", f.config, "JSON file mirroring the flags; flags win");
    sub->add_option("--out", f.out, "Output file (directory for validate)");
    if (with_model) {
      sub->add_option("--model", f.model, "Model definition (JSON)");
      sub->add_option("--sigma", f.sigma, "Diffusion coefficient");
      sub->add_option("--P", f.P, "Momentum, comma separated")->delimiter(',');
      sub->add_option("--n", f.n, "Nodes per axis");
      sub->add_option("--tol", f.tol, "Cell-problem tolerance");
    }
  };

  auto* cell = app.add_subcommand("cell", "Solve the cell problem");
  common(cell, true);
  cell->add_option("--csv", f.csv, "Write u as CSV");

  auto* spectral = app.add_subcommand("spectral", "Principal eigenvalue route");
  common(spectral, true);
  spectral->add_option("--csv", f.csv, "Write psi as CSV");

  auto* measure = app.add_subcommand("measure", "Stationary density and identities of a cell solution");
  common(measure, false);
  measure->add_option("--cell", f.cell, "Cell solution JSON");
  measure->add_flag("--identities", f.identities, "Check the identities");
  measure->add_option("--dP", f.dP, "Finite-difference step in P");
  measure->add_option("--tol", f.tol, "Tolerance for the extra cell solves");
  measure->add_option("--csv", f.csv, "Write theta as CSV");

  auto* lp = app.add_subcommand("lp", "Occupation-measure linear program");
  common(lp, true);
  lp->add_option("--m", f.m, "Velocity nodes per axis");
  lp->add_option("--vmax", f.vmax, "Velocity box half-width");
  lp->add_option("--csv", f.csv, "Write the x-marginal as CSV");

  auto* sim = app.add_subcommand("simulate", "Simulate the optimally controlled diffusion");
  common(sim, false);
  sim->add_option("--cell", f.cell, "Cell solution JSON");
  sim->add_option("--T", f.T, "Horizon");
  sim->add_option("--dt", f.dt, "Time step");
  sim->add_option("--paths", f.paths, "Number of paths");
  sim->add_option("--seed", f.seed, "RNG seed");
  sim->add_option("--threads", f.threads, "Worker threads (0: all cores)");
  sim->add_option("--csv", f.csv, "Write the occupation histogram as CSV");

  auto* sweep = app.add_subcommand("sweep", "Vanishing-viscosity sweep");
  common(sweep, true);
  sweep->add_option("--sigmas", f.sigmas, "Decreasing sigma list")->delimiter(',');
  sweep->add_option("--csv", f.csv, "Write the sweep table as CSV");

  auto* validate = app.add_subcommand("validate", "Run all routes and reconcile them");
  common(validate, true);
  validate->add_option("--m", f.m, "LP velocity nodes per axis");
  validate->add_option("--vmax", f.vmax, "LP velocity box half-width");
  validate->add_option("--T", f.T, "Simulation horizon");
  validate->add_option("--dt", f.dt, "Simulation time step");
  validate->add_option("--paths", f.paths, "Simulation paths");
  validate->add_option("--seed", f.seed, "RNG seed");
  validate->add_option("--threads", f.threads, "Simulation threads");
  validate->add_option("--sigmas", f.sigmas, "Sweep sigma list")->delimiter(',');
  validate->add_flag("--sweep", f.sweep, "Include the sigma sweep");
  validate->add_flag("--no-lp", f.no_lp, "Skip the LP stage");
  validate->add_flag("--no-simulate", f.no_simulate, "Skip the simulation stage");

  std::vector<const char*> argv{"stochmather"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  // Options registered on several subcommands: pick the active one's.
  CLI::App* active = app.get_subcommands().front();
  auto opt = [&](const char* name) -> CLI::Option* {
    try {
      return active->get_option(name);
    } catch (const CLI::OptionNotFound&) {
      return nullptr;
    }
  };
  reg.model = opt("--model");
  reg.sigma = opt("--sigma");
  reg.P = opt("--P");
  reg.n = opt("--n");
  reg.tol = opt("--tol");
  reg.out = opt("--out");
  reg.m = opt("--m");
  reg.vmax = opt("--vmax");
  reg.dP = opt("--dP");
  reg.T = opt("--T");
  reg.dt = opt("--dt");
  reg.paths = opt("--paths");
  reg.seed = opt("--seed");
  reg.threads = opt("--threads");
  reg.sigmas = opt("--sigmas");

  try {
    const Json file_cfg = f.config.empty() ? Json::object() : read_json(f.config);
    const RunConfig cfg = resolve(f, reg);
    const std::string name = active->get_name();
    if (name == "cell") return cmd_cell(cfg, f, out);
    if (name == "spectral") return cmd_spectral(cfg, f, out);
    if (name == "measure") return cmd_measure(cfg, f, file_cfg, out);
    if (name == "lp") return cmd_lp(cfg, f, out);
    if (name == "simulate") return cmd_simulate(cfg, f, file_cfg, out);
    if (name == "sweep") return cmd_sweep(cfg, f, out);
    return cmd_validate(cfg, f, out);
  } catch (const Error& e) {
    out << error_json(std::string(to_string(e.code())), e.what()).dump(2) << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    out << error_json("InternalError", e.what()).dump(2) << '\n';
    return kExitError;
  }
}

}  // namespace stochmather::cli
