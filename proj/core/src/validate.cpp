#include "stochmather/validate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "stochmather/error.hpp"
#include "stochmather/occupation_lp.hpp"
#include "stochmather/spectral.hpp"

namespace stochmather {

namespace {

class ReportBuilder {
 public:
  explicit ReportBuilder(ValidationReport& r) : r_(r) {}

  void at_most(const std::string& name, double value, double tol) {
    r_.checks.push_back({name, value, tol, false, std::isfinite(value) && value <= tol});
  }
  void at_least(const std::string& name, double value, double tol) {
    r_.checks.push_back({name, value, tol, true, std::isfinite(value) && value >= tol});
  }

  // Runs a stage, recording any failure instead of propagating it.
  template <class F>
  bool stage(const char* name, F&& f) {
    try {
      f();
      return true;
    } catch (const Error& e) {
      r_.errors.push_back({name, std::string(to_string(e.code())), e.what()});
    } catch (const std::exception& e) {
      r_.errors.push_back({name, "InternalError", e.what()});
    }
    return false;
  }

 private:
  ValidationReport& r_;
};

double l1_distance(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s * a.grid().cell_volume();
}

bool is_zero(const Momentum& P) { return P.norm() == 0.0; }

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> optional_double(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

double ratio_spread(const std::vector<double>& values) {
  if (values.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi <= 1e-12) return 1.0;
  if (*lo <= 0.0) return INFINITY;
  return *hi / *lo;
}

ValidationReport run_validate(const RunConfig& cfg) {
  ValidationReport report;
  report.config = encode(cfg);
  ReportBuilder rb(report);
  const std::filesystem::path out = cfg.out_dir;
  const bool write = !cfg.out_dir.empty();

  std::optional<HamiltonianModel> model;
  std::optional<Momentum> P;
  rb.stage("setup", [&] {
    if (!(cfg.sigma > 0.0)) throw Error(ErrorCode::sigma_zero_unsupported, "sigma must be positive");
    P.emplace(cfg.P);
    if (P->dim() != cfg.model.dim) throw Error(ErrorCode::invalid_argument, "P has the wrong dimension");
    model.emplace(cfg.model.instantiate(TorusGrid(cfg.model.dim, cfg.n)));
  });
  if (!model) {
    report.passed = false;
    if (write) write_json(out / "report.json", encode(report));
    return report;
  }

  CellOptions copt;
  copt.tol = cfg.tol.cell;

  std::optional<CellSolution> sol;
  rb.stage("cell", [&] {
    sol.emplace(solve_cell(*model, *P, cfg.sigma, copt));
    report.routes.cell = sol->Hbar;
    rb.at_most("cell.residual", cell_residual(*model, *P, cfg.sigma, sol->u, sol->Hbar), cfg.tol.cell);
    if (is_zero(*P)) {
      const std::vector<double> zero(static_cast<std::size_t>(model->dim()), 0.0);
      double hmin = INFINITY;
      double hmax = -INFINITY;
      for (std::size_t k = 0; k < model->grid().node_count(); ++k) {
        const double h = model->hamiltonian(zero, k);
        hmin = std::min(hmin, h);
        hmax = std::max(hmax, h);
      }
      rb.at_least("cell.lower_bound_margin", sol->Hbar - hmin, 0.0);
      rb.at_least("cell.upper_bound_margin", hmax - sol->Hbar, 0.0);
    }
    if (write) {
      write_json(out / "cell.json", encode(CellRecord{cfg.model, *sol}));
      export_csv(out / "u.csv", sol->u, "u");
    }
  });
  if (!sol) {
    report.passed = false;
    if (write) write_json(out / "report.json", encode(report));
    return report;
  }

  if (cfg.stages.spectral && model->kind() == HamiltonianModel::Kind::mechanical) {
    rb.stage("spectral", [&] {
      SpectralOptions sopt;
      sopt.tol = cfg.tol.spectral;
      const EigenSolution eig = principal_eigenvalue(model->potential(), *P, cfg.sigma, sopt);
      report.routes.spectral = eig.eigenvalue;
      rb.at_most("route.cell_vs_spectral", std::abs(eig.eigenvalue - sol->Hbar), cfg.tol.route_spectral);
      if (write) write_json(out / "spectral.json", encode(eig));
    });
  }

  std::optional<StationaryDensity> density;
  if (cfg.stages.measure || cfg.stages.simulate || cfg.stages.regularity) {
    rb.stage("measure", [&] {
      const GraphMeasure gm = mather_measure(*model, *sol, cfg.tol.cell);
      density = gm.density;
      rb.at_most("measure.action_identity", std::abs(gm.action + sol->Hbar), cfg.tol.action);
      if (cfg.stages.measure) {
        const IdentityReport ids = check_identities(*model, *sol, gm.density, cfg.tol.dP, copt);
        report.identities = ids;
        rb.at_most("identity.id1", ids.id1_err, cfg.tol.id1);
        rb.at_most("identity.id2", ids.id2_err, cfg.tol.id2);
        rb.at_most("identity.id3", ids.id3_gap, cfg.tol.id3);
        if (model->kind() == HamiltonianModel::Kind::mechanical && is_zero(*P)) {
          const ScalarField explicit_density = explicit_theta(sol->u, *P, cfg.sigma);
          rb.at_most("measure.explicit_theta_l1", l1_distance(gm.density.theta, explicit_density),
                     cfg.tol.explicit_theta);
        }
      }
      if (write) {
        write_json(out / "density.json", encode(gm.density));
        export_csv(out / "theta.csv", gm.density.theta, "theta");
      }
    });
  }

  if (cfg.stages.regularity && density) {
    rb.stage("regularity", [&] {
      const RegularityReport reg = regularity_report(*model, *sol, *density, cfg.regularity_steps, copt);
      report.regularity = reg;
      std::vector<double> est1;
      for (const Est1Point& p : reg.est1) est1.push_back(p.ratio);
      rb.at_most("regularity.est1_spread", ratio_spread(est1), cfg.tol.ratio_variation);
      rb.at_most("regularity.est2_spread", ratio_spread(reg.est2_ratios), cfg.tol.ratio_variation);
      if (!reg.est3_ratios.empty()) {
        rb.at_least("regularity.est3_min", *std::min_element(reg.est3_ratios.begin(), reg.est3_ratios.end()),
                    cfg.tol.est3_min);
      }
      double worst = 0.0;
      for (double r : est1) worst = std::max(worst, r);
      for (double r : reg.est2_ratios) worst = std::max(worst, r);
      if (reg.cap > 0.0) rb.at_most("regularity.cap", worst, reg.cap);
    });
  }

  if (cfg.stages.lp) {
    rb.stage("lp", [&] {
      const int n_lp = std::min(cfg.n, cfg.n_lp);
      const HamiltonianModel coarse = cfg.model.instantiate(TorusGrid(cfg.model.dim, n_lp));
      VelocityGrid vel{cfg.model.dim, cfg.v_max, cfg.m};
      if (coarse.kind() == HamiltonianModel::Kind::tabulated) vel = coarse.velocities();
      const CellSolution coarse_sol = solve_cell(coarse, *P, cfg.sigma, copt);
      report.routes.lp_grid_cell = coarse_sol.Hbar;
      LpOptions lopt;
      lopt.tol = cfg.tol.lp;
      const LpInstance inst = build_lp(coarse, vel, cfg.sigma, *P, lopt);
      const LpSolution lp = solve_lp(inst, lopt);
      report.routes.lp_action = lp.action_value;
      rb.at_most("route.lp_vs_cell", std::abs(lp.action_value + coarse_sol.Hbar), cfg.tol.route_lp);
      rb.at_most("lp.duality_gap", std::abs(lp.gap), cfg.tol.duality_gap);
      rb.at_most("lp.dual_infeasibility", lp.dual_infeasibility, cfg.tol.lp);
      rb.at_most("lp.complementarity", lp.complementarity, cfg.tol.lp);
      rb.at_most("lp.off_graph_mass", lp.measure.off_graph_mass(coarse_sol.drift), cfg.tol.graph_mass);
      double phi_err = 0.0;
      for (std::size_t k = 0; k < coarse.grid().node_count(); ++k) {
        const double dphi = lp.dual_potential[k] - lp.dual_potential[0];
        const double du = coarse_sol.u[k] - coarse_sol.u[0];
        phi_err = std::max(phi_err, std::abs(dphi - du));
      }
      rb.at_most("lp.dual_potential_vs_u", phi_err, cfg.tol.dual_potential);
      const StationaryDensity coarse_density = invariant_density(coarse_sol.drift, cfg.sigma, cfg.tol.cell);
      rb.at_most("lp.marginal_vs_theta_l1", l1_distance(lp.measure.x_marginal(), coarse_density.theta),
                 cfg.tol.lp_marginal);
      if (write) {
        write_json(out / "lp.json", encode(lp));
        export_csv(out / "lp_marginal.csv", lp.measure.x_marginal(), "theta");
      }
    });
  }

  if (cfg.stages.simulate && density) {
    rb.stage("simulate", [&] {
      SimulationConfig sc;
      sc.horizon = cfg.horizon;
      sc.dt = cfg.dt;
      sc.paths = cfg.paths;
      sc.seed = cfg.seed;
      sc.threads = cfg.threads;
      // Respect the step bound of the simulator on fine grids.
      const double vmax = sol->drift.max_abs();
      if (vmax > 0.0) sc.dt = std::min(sc.dt, 0.9 * model->grid().spacing() / (2.0 * vmax));
      report.simulation_dt = sc.dt;
      const PathEnsemble ens = simulate(*sol, sc);
      const RotationEstimate rot = rotation_vector(ens);
      report.rotation = rot;

      std::vector<double> dH;
      if (report.identities) {
        dH = report.identities->hbar_derivative;
      } else {
        for (int a = 0; a < P->dim(); ++a) {
          const double hp = solve_cell(*model, P->displaced(a, cfg.tol.dP), cfg.sigma, copt, &sol->u).Hbar;
          const double hm = solve_cell(*model, P->displaced(a, -cfg.tol.dP), cfg.sigma, copt, &sol->u).Hbar;
          dH.push_back((hp - hm) / (2.0 * cfg.tol.dP));
        }
      }
      double worst = 0.0;
      for (int a = 0; a < P->dim(); ++a) {
        const double se = std::max(rot.standard_error[a], 1e-300);
        worst = std::max(worst, std::abs(rot.mean[a] + dH[a]) / se);
      }
      rb.at_most("simulate.rotation_in_stderr", worst, cfg.tol.rotation_stderr);

      double implied = 0.0;
      for (std::size_t k = 0; k < model->grid().node_count(); ++k) {
        const auto v = sol->drift.at(k);
        double pv = 0.0;
        for (int a = 0; a < P->dim(); ++a) pv += (*P)[a] * v[a];
        implied -= ens.histogram[k] * (model->lagrangian(k, v) + pv);
      }
      implied *= model->grid().cell_volume();
      report.routes.simulation = implied;
      rb.at_most("route.simulation_vs_cell", std::abs(implied - sol->Hbar), cfg.tol.route_simulation);
      rb.at_most("simulate.histogram_l1", l1_distance(ens.histogram, density->theta), cfg.tol.histogram);
      if (write) export_csv(out / "histogram.csv", ens.histogram, "density");
    });
  }

  if (cfg.stages.sweep) {
    rb.stage("sweep", [&] {
      const HamiltonianModel fine = cfg.model.instantiate(TorusGrid(cfg.model.dim, cfg.sweep_n));
      const SigmaSweep sw = sigma_sweep(fine, *P, cfg.sweep_sigmas, copt);
      report.sweep = sw;
      double worst = 0.0;
      for (const SweepEntry& e : sw.entries) worst = std::max(worst, e.action_error);
      rb.at_most("sweep.action_identity", worst, cfg.tol.action);
      if (sw.limit_gap) rb.at_most("sweep.limit_gap", *sw.limit_gap, cfg.tol.sweep_limit);
      if (write) {
        write_json(out / "sweep.json", encode(sw));
        export_csv(out / "sweep.csv", sw);
      }
    });
  }

  report.passed = report.errors.empty() &&
                  std::all_of(report.checks.begin(), report.checks.end(), [](const Check& c) { return c.passed; });
  if (write) write_json(out / "report.json", encode(report));
  return report;
}

Json encode(const RunConfig& c) {
  const Tolerances& t = c.tol;
  return {{"model", c.model},
          {"model_path", c.model_path},
          {"sigma", c.sigma},
          {"P", c.P},
          {"n", c.n},
          {"n_lp", c.n_lp},
          {"m", c.m},
          {"vmax", c.v_max},
          {"seed", c.seed},
          {"T", c.horizon},
          {"dt", c.dt},
          {"paths", c.paths},
          {"threads", c.threads},
          {"sigmas", c.sweep_sigmas},
          {"sweep_n", c.sweep_n},
          {"regularity_steps", c.regularity_steps},
          {"out", c.out_dir},
          {"stages",
           {{"spectral", c.stages.spectral},
            {"measure", c.stages.measure},
            {"regularity", c.stages.regularity},
            {"lp", c.stages.lp},
            {"simulate", c.stages.simulate},
            {"sweep", c.stages.sweep}}},
          {"tolerances",
           {{"cell", t.cell},
            {"spectral", t.spectral},
            {"lp", t.lp},
            {"duality_gap", t.duality_gap},
            {"route_spectral", t.route_spectral},
            {"route_lp", t.route_lp},
            {"route_simulation", t.route_simulation},
            {"explicit_theta", t.explicit_theta},
            {"id1", t.id1},
            {"id2", t.id2},
            {"id3", t.id3},
            {"dP", t.dP},
            {"action", t.action},
            {"graph_mass", t.graph_mass},
            {"dual_potential", t.dual_potential},
            {"lp_marginal", t.lp_marginal},
            {"histogram", t.histogram},
            {"rotation_stderr", t.rotation_stderr},
            {"sweep_limit", t.sweep_limit},
            {"ratio_variation", t.ratio_variation},
            {"est3_min", t.est3_min}}}};
}

void apply_config(const Json& j, RunConfig& c) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "config must be a JSON object");
    auto get = [&](const Json& obj, const char* key, auto& field) {
      if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("model") && j.at("model").is_object()) c.model = j.at("model").get<ModelSpec>();
    if (j.contains("model") && j.at("model").is_string()) c.model_path = j.at("model").get<std::string>();
    get(j, "model_path", c.model_path);
    get(j, "sigma", c.sigma);
    if (j.contains("P")) {
      c.P = j.at("P").is_number() ? std::vector<double>{j.at("P").get<double>()}
                                  : j.at("P").get<std::vector<double>>();
    }
    get(j, "n", c.n);
    get(j, "n_lp", c.n_lp);
    get(j, "m", c.m);
    get(j, "vmax", c.v_max);
    get(j, "seed", c.seed);
    get(j, "T", c.horizon);
    get(j, "dt", c.dt);
    get(j, "paths", c.paths);
    get(j, "threads", c.threads);
    get(j, "sigmas", c.sweep_sigmas);
    get(j, "sweep_n", c.sweep_n);
    get(j, "regularity_steps", c.regularity_steps);
    get(j, "out", c.out_dir);
    if (j.contains("tol") && j.at("tol").is_number()) c.tol.cell = j.at("tol").get<double>();
    if (j.contains("stages")) {
      const Json& s = j.at("stages");
      get(s, "spectral", c.stages.spectral);
      get(s, "measure", c.stages.measure);
      get(s, "regularity", c.stages.regularity);
      get(s, "lp", c.stages.lp);
      get(s, "simulate", c.stages.simulate);
      get(s, "sweep", c.stages.sweep);
    }
    if (j.contains("tolerances")) {
      const Json& t = j.at("tolerances");
      Tolerances& x = c.tol;
      get(t, "cell", x.cell);
      get(t, "spectral", x.spectral);
      get(t, "lp", x.lp);
      get(t, "duality_gap", x.duality_gap);
      get(t, "route_spectral", x.route_spectral);
      get(t, "route_lp", x.route_lp);
      get(t, "route_simulation", x.route_simulation);
      get(t, "explicit_theta", x.explicit_theta);
      get(t, "id1", x.id1);
      get(t, "id2", x.id2);
      get(t, "id3", x.id3);
      get(t, "dP", x.dP);
      get(t, "action", x.action);
      get(t, "graph_mass", x.graph_mass);
      get(t, "dual_potential", x.dual_potential);
      get(t, "lp_marginal", x.lp_marginal);
      get(t, "histogram", x.histogram);
      get(t, "rotation_stderr", x.rotation_stderr);
      get(t, "sweep_limit", x.sweep_limit);
      get(t, "ratio_variation", x.ratio_variation);
      get(t, "est3_min", x.est3_min);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("malformed config: ") + e.what());
  }
  const double tols[] = {c.tol.cell, c.tol.spectral, c.tol.lp, c.tol.duality_gap, c.tol.route_spectral,
                         c.tol.route_lp, c.tol.route_simulation, c.tol.explicit_theta, c.tol.id1,
                         c.tol.id2, c.tol.id3, c.tol.dP, c.tol.action, c.tol.graph_mass,
                         c.tol.dual_potential, c.tol.lp_marginal, c.tol.histogram,
                         c.tol.rotation_stderr, c.tol.sweep_limit, c.tol.ratio_variation, c.tol.est3_min};
  for (double t : tols) {
    if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "config: tolerances must be positive");
  }
}

Json encode(const ValidationReport& r) {
  Json checks = Json::array();
  for (const Check& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"tolerance", c.tolerance},
                      {"relation", c.at_least ? ">=" : "<="},
                      {"passed", c.passed}});
  }
  Json errors = Json::array();
  for (const StageError& e : r.errors) errors.push_back({{"stage", e.stage}, {"code", e.code}, {"message", e.message}});
  Json body{{"config", r.config},
            {"routes",
             {{"cell", r.routes.cell},
              {"spectral", optional_json(r.routes.spectral)},
              {"lp_action", optional_json(r.routes.lp_action)},
              {"lp_grid_cell", optional_json(r.routes.lp_grid_cell)},
              {"simulation", optional_json(r.routes.simulation)}}},
            {"checks", checks},
            {"errors", errors},
            {"simulation_dt", optional_json(r.simulation_dt)},
            {"passed", r.passed}};
  if (r.identities) body["identities"] = encode(*r.identities);
  if (r.regularity) body["regularity"] = encode(*r.regularity);
  if (r.sweep) body["sweep"] = encode(*r.sweep);
  if (r.rotation) body["rotation"] = {{"mean", r.rotation->mean}, {"standard_error", r.rotation->standard_error}};
  return document("validation_report", std::move(body));
}

ValidationReport decode_report(const Json& j) {
  require_document(j, "validation_report");
  try {
    ValidationReport r;
    r.config = j.at("config");
    const Json& routes = j.at("routes");
    r.routes.cell = routes.at("cell").get<double>();
    r.routes.spectral = optional_double(routes, "spectral");
    r.routes.lp_action = optional_double(routes, "lp_action");
    r.routes.lp_grid_cell = optional_double(routes, "lp_grid_cell");
    r.routes.simulation = optional_double(routes, "simulation");
    for (const auto& c : j.at("checks")) {
      r.checks.push_back({c.at("name").get<std::string>(), c.at("value").get<double>(),
                          c.at("tolerance").get<double>(), c.at("relation") == ">=", c.at("passed").get<bool>()});
    }
    for (const auto& e : j.at("errors")) {
      r.errors.push_back({e.at("stage").get<std::string>(), e.at("code").get<std::string>(),
                          e.at("message").get<std::string>()});
    }
    r.simulation_dt = optional_double(j, "simulation_dt");
    r.passed = j.at("passed").get<bool>();
    if (j.contains("identities")) r.identities = decode_identities(j.at("identities"));
    if (j.contains("regularity")) r.regularity = decode_regularity(j.at("regularity"));
    if (j.contains("sweep")) r.sweep = decode_sweep(j.at("sweep"));
    if (j.contains("rotation")) {
      r.rotation = RotationEstimate{j.at("rotation").at("mean").get<std::vector<double>>(),
                                    j.at("rotation").at("standard_error").get<std::vector<double>>()};
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_failure, std::string("validation report: ") + e.what());
  }
}

}  // namespace stochmather
