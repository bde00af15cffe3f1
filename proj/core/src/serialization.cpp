#include "stochmather/serialization.hpp"

#include <fstream>
#include <sstream>

#include "stochmather/error.hpp"

namespace stochmather {

namespace {

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_failure, std::string(what) + ": " + e.what());
  }
}

std::vector<double> values_of(std::span<const double> s) { return {s.begin(), s.end()}; }

Json encode_velocity_grid(const VelocityGrid& v) {
  return {{"dim", v.dim}, {"v_max", v.v_max}, {"nodes_per_axis", v.nodes_per_axis}};
}

VelocityGrid decode_velocity_grid(const Json& j) {
  return {j.at("dim").get<int>(), j.at("v_max").get<double>(), j.at("nodes_per_axis").get<int>()};
}

}  // namespace

Json document(const char* type, Json body) {
  body["format_version"] = kFormatVersion;
  body["type"] = type;
  return body;
}

void require_document(const Json& j, const char* type) {
  if (!j.is_object() || !j.contains("format_version") || !j.contains("type")) {
    throw Error(ErrorCode::io_failure, std::string("expected a '") + type + "' document");
  }
  if (j.at("format_version") != kFormatVersion) {
    throw Error(ErrorCode::io_failure, "unsupported format_version " + j.at("format_version").dump());
  }
  if (j.at("type") != type) {
    throw Error(ErrorCode::io_failure,
                std::string("expected a '") + type + "' document, got " + j.at("type").dump());
  }
}

Json encode(const TorusGrid& g) { return {{"dim", g.dim()}, {"nodes_per_axis", g.nodes_per_axis()}}; }

TorusGrid decode_grid(const Json& j) {
  return guarded("grid", [&] { return TorusGrid(j.at("dim").get<int>(), j.at("nodes_per_axis").get<int>()); });
}

Json encode(const ScalarField& f) { return {{"grid", encode(f.grid())}, {"values", values_of(f.values())}}; }

ScalarField decode_scalar(const Json& j) {
  return guarded("scalar field", [&] {
    return ScalarField(decode_grid(j.at("grid")), j.at("values").get<std::vector<double>>());
  });
}

Json encode(const VectorField& f) {
  return {{"grid", encode(f.grid())}, {"components", values_of(f.values())}};
}

VectorField decode_vector(const Json& j) {
  return guarded("vector field", [&] {
    return VectorField(decode_grid(j.at("grid")), j.at("components").get<std::vector<double>>());
  });
}

Json encode(const Momentum& P) { return values_of(P.values()); }

Momentum decode_momentum(const Json& j) {
  return guarded("momentum", [&] { return Momentum(j.get<std::vector<double>>()); });
}

Json encode(const CellRecord& r) {
  const CellSolution& s = r.solution;
  return document("cell_solution", {{"model", r.model},
                                    {"P", encode(s.P)},
                                    {"sigma", s.sigma},
                                    {"Hbar", s.Hbar},
                                    {"residual", s.residual},
                                    {"iterations", s.iterations},
                                    {"used_fallback", s.used_fallback},
                                    {"u", encode(s.u)},
                                    {"drift", encode(s.drift)}});
}

CellRecord decode_cell(const Json& j) {
  require_document(j, "cell_solution");
  return guarded("cell solution", [&] {
    return CellRecord{j.at("model").get<ModelSpec>(),
                      CellSolution{decode_momentum(j.at("P")), j.at("sigma").get<double>(),
                                   decode_scalar(j.at("u")), j.at("Hbar").get<double>(),
                                   j.at("residual").get<double>(), decode_vector(j.at("drift")),
                                   j.at("iterations").get<int>(), j.at("used_fallback").get<bool>()}};
  });
}

Json encode(const EigenSolution& e) {
  Json hist = Json::array();
  for (const EigenBracket& b : e.history) hist.push_back({b.lower, b.upper});
  return document("eigen_solution", {{"eigenvalue", e.eigenvalue},
                                     {"psi", encode(e.eigenfunction)},
                                     {"sigma", e.sigma},
                                     {"P", encode(e.P)},
                                     {"residual", e.residual},
                                     {"iterations", e.iterations},
                                     {"history", hist}});
}

EigenSolution decode_eigen(const Json& j) {
  require_document(j, "eigen_solution");
  return guarded("eigen solution", [&] {
    EigenSolution e{j.at("eigenvalue").get<double>(), decode_scalar(j.at("psi")),
                    j.at("sigma").get<double>(), decode_momentum(j.at("P")),
                    j.at("residual").get<double>(), j.at("iterations").get<int>(), {}};
    for (const auto& b : j.at("history")) e.history.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    return e;
  });
}

Json encode(const StationaryDensity& d) {
  return document("stationary_density", {{"theta", encode(d.theta)},
                                         {"drift", encode(d.drift)},
                                         {"sigma", d.sigma},
                                         {"residual", d.residual}});
}

StationaryDensity decode_density(const Json& j) {
  require_document(j, "stationary_density");
  return guarded("stationary density", [&] {
    return StationaryDensity{decode_scalar(j.at("theta")), decode_vector(j.at("drift")),
                             j.at("sigma").get<double>(), j.at("residual").get<double>()};
  });
}

Json encode(const IdentityReport& r) {
  return document("identity_report", {{"id1_err", r.id1_err},
                                      {"id2_err", r.id2_err},
                                      {"id3_gap", r.id3_gap},
                                      {"mean_dpH", r.mean_dpH},
                                      {"hbar_derivative", r.hbar_derivative}});
}

IdentityReport decode_identities(const Json& j) {
  require_document(j, "identity_report");
  return guarded("identity report", [&] {
    return IdentityReport{j.at("id1_err").get<double>(), j.at("id2_err").get<double>(),
                          j.at("id3_gap").get<double>(), j.at("mean_dpH").get<std::vector<double>>(),
                          j.at("hbar_derivative").get<std::vector<double>>()};
  });
}

Json encode(const LpSolution& s) {
  // Weights are stored sparsely as [column, mass] pairs.
  Json support = Json::array();
  for (std::size_t c = 0; c < s.measure.weights.size(); ++c) {
    if (s.measure.weights[c] != 0.0) support.push_back({c, s.measure.weights[c]});
  }
  return document("lp_solution", {{"value", s.value},
                                  {"action_value", s.action_value},
                                  {"gap", s.gap},
                                  {"complementarity", s.complementarity},
                                  {"dual_infeasibility", s.dual_infeasibility},
                                  {"pivots", s.pivots},
                                  {"grid", encode(s.measure.grid)},
                                  {"velocities", encode_velocity_grid(s.measure.velocities)},
                                  {"support", support},
                                  {"duals", s.duals},
                                  {"dual_potential", values_of(s.dual_potential.values())}});
}

LpSolution decode_lp(const Json& j) {
  require_document(j, "lp_solution");
  return guarded("lp solution", [&] {
    const TorusGrid grid = decode_grid(j.at("grid"));
    const VelocityGrid vel = decode_velocity_grid(j.at("velocities"));
    DiscreteOccupationMeasure m{grid, vel, std::vector<double>(grid.node_count() * vel.size(), 0.0)};
    for (const auto& p : j.at("support")) {
      const auto c = p.at(0).get<std::size_t>();
      if (c >= m.weights.size()) throw Error(ErrorCode::io_failure, "lp solution: column out of range");
      m.weights[c] = p.at(1).get<double>();
    }
    return LpSolution{j.at("value").get<double>(),
                      j.at("action_value").get<double>(),
                      std::move(m),
                      j.at("duals").get<std::vector<double>>(),
                      ScalarField(grid, j.at("dual_potential").get<std::vector<double>>()),
                      j.at("complementarity").get<double>(),
                      j.at("dual_infeasibility").get<double>(),
                      j.at("gap").get<double>(),
                      j.at("pivots").get<std::size_t>()};
  });
}

Json encode(const PathEnsemble& e) {
  const SimulationConfig& c = e.config;
  return document("path_ensemble", {{"config",
                                     {{"horizon", c.horizon},
                                      {"dt", c.dt},
                                      {"paths", c.paths},
                                      {"seed", c.seed},
                                      {"x0", {c.x0[0], c.x0[1]}},
                                      {"threads", c.threads}}},
                                    {"steps", e.steps},
                                    {"endpoints", e.endpoints},
                                    {"displacement", e.displacement},
                                    {"histogram", encode(e.histogram)}});
}

PathEnsemble decode_ensemble(const Json& j) {
  require_document(j, "path_ensemble");
  return guarded("path ensemble", [&] {
    const Json& c = j.at("config");
    SimulationConfig cfg;
    cfg.horizon = c.at("horizon").get<double>();
    cfg.dt = c.at("dt").get<double>();
    cfg.paths = c.at("paths").get<int>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.x0 = {c.at("x0").at(0).get<double>(), c.at("x0").at(1).get<double>()};
    cfg.threads = c.at("threads").get<unsigned>();
    return PathEnsemble{cfg, j.at("steps").get<std::int64_t>(),
                        j.at("endpoints").get<std::vector<double>>(),
                        j.at("displacement").get<std::vector<double>>(), decode_scalar(j.at("histogram"))};
  });
}

Json encode(const RegularityReport& r) {
  Json est1 = Json::array();
  for (const Est1Point& p : r.est1) est1.push_back({p.shift_length, p.ratio});
  return document("regularity_report", {{"est1", est1},
                                        {"est1_growth", r.est1_growth},
                                        {"est2_steps", r.est2_steps},
                                        {"est2_ratios", r.est2_ratios},
                                        {"est3_ratios", r.est3_ratios},
                                        {"gamma_L", r.gamma_L},
                                        {"Gamma", r.Gamma},
                                        {"cap", r.cap}});
}

RegularityReport decode_regularity(const Json& j) {
  require_document(j, "regularity_report");
  return guarded("regularity report", [&] {
    RegularityReport r;
    for (const auto& p : j.at("est1")) r.est1.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    r.est1_growth = j.at("est1_growth").get<bool>();
    r.est2_steps = j.at("est2_steps").get<std::vector<double>>();
    r.est2_ratios = j.at("est2_ratios").get<std::vector<double>>();
    r.est3_ratios = j.at("est3_ratios").get<std::vector<double>>();
    r.gamma_L = j.at("gamma_L").get<double>();
    r.Gamma = j.at("Gamma").get<double>();
    r.cap = j.at("cap").get<double>();
    return r;
  });
}

Json encode(const SigmaSweep& s) {
  Json entries = Json::array();
  for (const SweepEntry& e : s.entries) {
    entries.push_back({{"sigma", e.sigma},
                       {"Hbar", e.Hbar},
                       {"increment", e.increment},
                       {"u_sup_diff", e.u_sup_diff},
                       {"theta_l1", e.theta_l1},
                       {"action", e.action},
                       {"action_error", e.action_error},
                       {"residual", e.residual},
                       {"iterations", e.iterations}});
  }
  Json body{{"P", encode(s.P)}, {"entries", entries}};
  if (s.analytic_limit) body["analytic_limit"] = *s.analytic_limit;
  if (s.limit_gap) body["limit_gap"] = *s.limit_gap;
  return document("sigma_sweep", std::move(body));
}

SigmaSweep decode_sweep(const Json& j) {
  require_document(j, "sigma_sweep");
  return guarded("sigma sweep", [&] {
    SigmaSweep s{decode_momentum(j.at("P")), {}, std::nullopt, std::nullopt};
    for (const auto& e : j.at("entries")) {
      s.entries.push_back({e.at("sigma").get<double>(), e.at("Hbar").get<double>(),
                           e.at("increment").get<double>(), e.at("u_sup_diff").get<double>(),
                           e.at("theta_l1").get<double>(), e.at("action").get<double>(),
                           e.at("action_error").get<double>(), e.at("residual").get<double>(),
                           e.at("iterations").get<int>()});
    }
    if (j.contains("analytic_limit")) s.analytic_limit = j.at("analytic_limit").get<double>();
    if (j.contains("limit_gap")) s.limit_gap = j.at("limit_gap").get<double>();
    return s;
  });
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::io_failure, path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_failure, path.string() + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::io_failure, path.string() + ": write failed");
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, path.string() + ": cannot open for reading");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_failure, path.string() + ": " + e.what());
  }
}

void export_csv(const std::filesystem::path& path, const ScalarField& f, const char* name) {
  std::ostringstream s;
  write_csv(s, f, name);
  write_text(path, s.str());
}

void export_csv(const std::filesystem::path& path, const VectorField& f, const char* name) {
  std::ostringstream s;
  write_csv(s, f, name);
  write_text(path, s.str());
}

void export_csv(const std::filesystem::path& path, const SigmaSweep& sweep) {
  std::ostringstream s;
  s.precision(17);
  s << "sigma,Hbar,increment,u_sup_diff,theta_l1,action_error\n";
  for (const SweepEntry& e : sweep.entries) {
    s << e.sigma << ',' << e.Hbar << ',' << e.increment << ',' << e.u_sup_diff << ',' << e.theta_l1
      << ',' << e.action_error << '\n';
  }
  write_text(path, s.str());
}

}  // namespace stochmather
