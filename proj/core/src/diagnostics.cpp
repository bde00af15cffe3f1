#include "stochmather/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "stochmather/error.hpp"

namespace stochmather {

namespace {

// ∫ |a - b|² θ for vector fields, plus a constant vector c added to a - b.
double weighted_sq_diff(const VectorField& a, const VectorField& b, const ScalarField& theta,
                        std::span<const double> c = {}) {
  const TorusGrid& g = theta.grid();
  double acc = 0.0;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    double s = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      const double e = a(k, d) - b(k, d) + (c.empty() ? 0.0 : c[d]);
      s += e * e;
    }
    acc += s * theta[k];
  }
  return acc * g.cell_volume();
}

}  // namespace

std::vector<Est1Point> regularity_est1(const CellSolution& sol, const StationaryDensity& dens,
                                       const std::vector<Offset>& offsets) {
  const TorusGrid& g = sol.u.grid();
  const VectorField du = gradient(sol.u);
  std::vector<Est1Point> out;
  for (const Offset& y : offsets) {
    const double len =
        g.spacing() * std::sqrt(static_cast<double>(y[0]) * y[0] + static_cast<double>(y[1]) * y[1]);
    if (!(len > 0.0)) throw Error(ErrorCode::invalid_argument, "regularity_est1: zero offset");
    VectorField moved(g);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      const std::size_t src = g.shifted(k, y);
      for (int d = 0; d < g.dim(); ++d) moved(k, d) = du(src, d);
    }
    out.push_back({len, weighted_sq_diff(moved, du, dens.theta) / (len * len)});
  }
  return out;
}

bool est1_growth_flag(const std::vector<Est1Point>& points) {
  std::vector<Est1Point> p = points;
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.shift_length < b.shift_length; });
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (p[i].ratio > 2.0 * p[i + 1].ratio) return true;
  }
  return false;
}

Est23 regularity_est2_est3(const HamiltonianModel& model, const CellSolution& at_P,
                           const StationaryDensity& density_P, const Momentum& P_prime,
                           const CellOptions& options) {
  const Momentum& P = at_P.P;
  if (P_prime.dim() != P.dim()) throw Error(ErrorCode::invalid_argument, "est2/est3: dimension mismatch");
  double dist2 = 0.0;
  std::vector<double> dP(static_cast<std::size_t>(P.dim()));
  for (int a = 0; a < P.dim(); ++a) {
    dP[a] = P[a] - P_prime[a];
    dist2 += dP[a] * dP[a];
  }
  if (!(dist2 > 0.0)) throw Error(ErrorCode::invalid_argument, "est2/est3: P and P' coincide");
  const CellSolution other = solve_cell(model, P_prime, at_P.sigma, options, &at_P.u);
  const VectorField g0 = gradient(at_P.u);
  const VectorField g1 = gradient(other.u);
  return {weighted_sq_diff(g0, g1, density_P.theta) / dist2,
          weighted_sq_diff(g0, g1, density_P.theta, dP) / dist2};
}

Est23 regularity_est2_est3(const HamiltonianModel& model, const Momentum& P, const Momentum& P_prime,
                           double sigma, const CellOptions& options) {
  const CellSolution sol = solve_cell(model, P, sigma, options);
  const StationaryDensity dens = invariant_density(sol.drift, sigma);
  return regularity_est2_est3(model, sol, dens, P_prime, options);
}

RegularityReport regularity_report(const HamiltonianModel& model, const CellSolution& sol,
                                   const StationaryDensity& dens, const std::vector<double>& steps,
                                   const CellOptions& options) {
  RegularityReport r;
  r.est1 = regularity_est1(sol, dens, {{1, 0}, {2, 0}, {4, 0}, {8, 0}});
  r.est1_growth = est1_growth_flag(r.est1);
  for (double s : steps) {
    const Est23 e = regularity_est2_est3(model, sol, dens, sol.P.displaced(0, s), options);
    r.est2_steps.push_back(s);
    r.est2_ratios.push_back(e.est2_ratio);
    r.est3_ratios.push_back(e.est3_ratio);
  }
  r.gamma_L = model.convexity_modulus();
  r.Gamma = model.hamiltonian_convexity_bound();
  const double lip = model.x_lipschitz();
  r.cap = 10.0 * lip * lip / (r.gamma_L * r.gamma_L);
  return r;
}

double analytic_hbar_1d(const ScalarField& V, double P) {
  if (V.grid().dim() != 1) throw Error(ErrorCode::invalid_argument, "analytic_hbar_1d: 1D only");
  const double vmax = V.max();
  auto action = [&](double E) {
    double acc = 0.0;
    for (double v : V.values()) acc += std::sqrt(std::max(0.0, 2.0 * (E - v)));
    return acc * V.grid().spacing();
  };
  const double target = std::abs(P);
  if (target <= action(vmax)) return vmax;
  double lo = vmax;
  double hi = vmax + 0.5 * P * P;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (action(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SigmaSweep sigma_sweep(const HamiltonianModel& model, const Momentum& P,
                       const std::vector<double>& sigmas, const CellOptions& options) {
  if (sigmas.empty()) throw Error(ErrorCode::invalid_argument, "sigma_sweep: empty sigma list");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0)) throw Error(ErrorCode::invalid_argument, "sigma_sweep: sigmas must be positive");
    if (i > 0 && !(sigmas[i] < sigmas[i - 1])) {
      throw Error(ErrorCode::invalid_argument, "sigma_sweep: sigmas must be strictly decreasing");
    }
  }
  if (sigmas.back() < model.grid().spacing()) {
    throw Error(ErrorCode::invalid_argument, "sigma_sweep: smallest sigma is below the grid spacing");
  }

  SigmaSweep sweep{P, {}, std::nullopt, std::nullopt};
  std::vector<ScalarField> us;
  std::vector<ScalarField> thetas;
  us.reserve(sigmas.size());  // warm points into us
  const ScalarField* warm = nullptr;
  for (double s : sigmas) {
    CellSolution sol = solve_cell(model, P, s, options, warm);
    const GraphMeasure gm = mather_measure(model, sol);
    SweepEntry e;
    e.sigma = s;
    e.Hbar = sol.Hbar;
    e.increment = sweep.entries.empty() ? 0.0 : std::abs(sol.Hbar - sweep.entries.back().Hbar);
    e.action = gm.action;
    e.action_error = std::abs(gm.action + sol.Hbar);
    e.residual = sol.residual;
    e.iterations = sol.iterations;
    sweep.entries.push_back(e);
    us.push_back(sol.u);
    thetas.push_back(gm.density.theta);
    warm = &us.back();
  }
  const ScalarField& u_ref = us.back();
  const ScalarField& t_ref = thetas.back();
  for (std::size_t i = 0; i < sweep.entries.size(); ++i) {
    double du = 0.0;
    double dt = 0.0;
    for (std::size_t k = 0; k < u_ref.size(); ++k) {
      du = std::max(du, std::abs(us[i][k] - u_ref[k]));
      dt += std::abs(thetas[i][k] - t_ref[k]);
    }
    sweep.entries[i].u_sup_diff = du;
    sweep.entries[i].theta_l1 = dt * u_ref.grid().cell_volume();
  }
  if (model.dim() == 1 && model.kind() == HamiltonianModel::Kind::mechanical) {
    sweep.analytic_limit = analytic_hbar_1d(model.potential(), P[0]);
    sweep.limit_gap = std::abs(sweep.entries.back().Hbar - *sweep.analytic_limit);
  }
  return sweep;
}

}  // namespace stochmather
