#include "stochmather/cell_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include <Eigen/SparseLU>

#include "stochmather/error.hpp"

namespace stochmather {

namespace {

using SparseCol = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using Controls = std::vector<ControlChoice>;

struct OneSided {
  std::vector<ScalarField> forward;
  std::vector<ScalarField> backward;

  explicit OneSided(const ScalarField& u) {
    for (int a = 0; a < u.grid().dim(); ++a) {
      forward.push_back(forward_difference(u, a));
      backward.push_back(backward_difference(u, a));
    }
  }

  void at(std::size_t node, Coord& f, Coord& b) const {
    for (std::size_t a = 0; a < forward.size(); ++a) {
      f[a] = forward[a][node];
      b[a] = backward[a][node];
    }
  }
};

void validate_inputs(const HamiltonianModel& model, const Momentum& P, double sigma, const CellOptions& opt) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::sigma_zero_unsupported,
                "cell solver requires sigma > 0; the sigma = 0 limit is served by the 1D analytic formula");
  }
  if (!(opt.tol > 0.0)) throw Error(ErrorCode::invalid_argument, "cell solver: tol must be positive");
  if (opt.max_iter < 1) throw Error(ErrorCode::invalid_argument, "cell solver: max_iter must be >= 1");
  if (P.dim() != model.dim()) throw Error(ErrorCode::invalid_argument, "cell solver: P dimension differs from model");
}

// Best control at every node. When `current` is given, a node keeps its
// current control unless the new one is strictly better, so finite policy
// sets cannot cycle between equal-cost actions.
Controls improve(const HamiltonianModel& model, const Momentum& P, const ScalarField& u,
                 const Controls* current) {
  const OneSided d(u);
  const TorusGrid& g = u.grid();
  Controls out(g.node_count());
  Coord f{}, b{};
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    d.at(k, f, b);
    const std::span<const double> fs(f.data(), g.dim()), bs(b.data(), g.dim());
    ControlChoice best = model.upwind_control(k, P, fs, bs);
    if (current != nullptr) {
      const double keep = model.control_cost(k, P, (*current)[k], fs, bs);
      if (keep <= best.cost + 1e-14 * (1.0 + std::abs(best.cost))) {
        best = (*current)[k];
        best.cost = keep;
      }
    }
    out[k] = best;
  }
  return out;
}

VectorField drift_of(const TorusGrid& g, const Controls& controls) {
  VectorField v(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    for (int a = 0; a < g.dim(); ++a) v(k, a) = controls[k].velocity[a];
  }
  return v;
}

// L(x, v) + P·v for the control at each node.
Eigen::VectorXd running_cost(const HamiltonianModel& model, const Momentum& P, const Controls& controls) {
  const std::size_t n = controls.size();
  Eigen::VectorXd c(static_cast<Eigen::Index>(n));
  const Coord zero{0.0, 0.0};
  const std::span<const double> zs(zero.data(), model.dim());
  for (std::size_t k = 0; k < n; ++k) {
    c[static_cast<Eigen::Index>(k)] = model.control_cost(k, P, controls[k], zs, zs);
  }
  return c;
}

double residual_from(const ScalarField& u, double sigma, const Controls& improved, double Hbar) {
  const ScalarField lap = laplacian(u);
  const double half_s2 = 0.5 * sigma * sigma;
  double r = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    r = std::max(r, std::abs(half_s2 * lap[k] + improved[k].cost + Hbar));
  }
  return r;
}

void normalize_min_zero(ScalarField& u) {
  const double m = u.min();
  for (double& x : u.values()) x -= m;
}

Eigen::VectorXd sparse_solve(const SparseCol& a, const Eigen::VectorXd& rhs, const char* what) {
  Eigen::SparseLU<SparseCol> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::singular_policy_system,
                std::string(what) + ": policy system is singular; refine the grid");
  }
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw Error(ErrorCode::singular_policy_system, std::string(what) + ": policy solve failed");
  }
  return x;
}

// Solves A^v u + H̄ = -(L + P·v) with u(node 0) = 0: column 0 of the
// generator multiplies u_0 = 0, so it is replaced by the H̄ column of ones.
ScalarField evaluate_ergodic(const HamiltonianModel& model, const Momentum& P, double sigma,
                             const Controls& controls, double& Hbar) {
  const TorusGrid& g = model.grid();
  const VectorField v = drift_of(g, controls);
  const auto n = static_cast<Eigen::Index>(g.node_count());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(g.node_count() * (2 * g.dim() + 2));
  const double diffusion = 0.5 * sigma * sigma;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    drift_diffusion_row(g, k, diffusion, v.at(k), [&](std::size_t col, double value) {
      if (col != 0) t.emplace_back(row, static_cast<Eigen::Index>(col), value);
    });
    t.emplace_back(row, 0, 1.0);
  }
  SparseCol a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  const Eigen::VectorXd z = sparse_solve(a, -running_cost(model, P, controls), "policy evaluation");
  Hbar = z[0];
  ScalarField u(g);
  for (Eigen::Index k = 1; k < n; ++k) u[static_cast<std::size_t>(k)] = z[k];
  return u;
}

ScalarField evaluate_discounted(const HamiltonianModel& model, const Momentum& P, double sigma,
                                double alpha, const Controls& controls) {
  const TorusGrid& g = model.grid();
  const VectorField v = drift_of(g, controls);
  const auto n = static_cast<Eigen::Index>(g.node_count());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(g.node_count() * (2 * g.dim() + 2));
  const double diffusion = 0.5 * sigma * sigma;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    drift_diffusion_row(g, k, diffusion, v.at(k), [&](std::size_t col, double value) {
      t.emplace_back(row, static_cast<Eigen::Index>(col), -value);
    });
    t.emplace_back(row, row, alpha);
  }
  SparseCol a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  const Eigen::VectorXd z = sparse_solve(a, running_cost(model, P, controls), "discounted evaluation");
  return ScalarField(g, std::vector<double>(z.data(), z.data() + n));
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

struct IterationState {
  ScalarField u;
  Controls controls;
  double Hbar = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

enum class Outcome { converged, stalled, exhausted };

Outcome ergodic_policy_iteration(const HamiltonianModel& model, const Momentum& P, double sigma,
                                 const CellOptions& opt, IterationState& s, int budget) {
  double best_residual = std::numeric_limits<double>::infinity();
  int stalled_for = 0;
  for (int it = 0; it < budget; ++it) {
    double Hbar = 0.0;
    ScalarField u = evaluate_ergodic(model, P, sigma, s.controls, Hbar);
    normalize_min_zero(u);
    Controls improved = improve(model, P, u, &s.controls);
    const double residual = residual_from(u, sigma, improved, Hbar);
    const double du = sup_diff(u, s.u);
    s.u = std::move(u);
    s.controls = std::move(improved);
    s.Hbar = Hbar;
    s.residual = residual;
    ++s.iterations;
    if (residual <= opt.tol && du < opt.tol) return Outcome::converged;
    if (residual < 0.999 * best_residual) {
      best_residual = residual;
      stalled_for = 0;
    } else if (++stalled_for >= 8) {
      return Outcome::stalled;
    }
  }
  return Outcome::exhausted;
}

// Vanishing-discount continuation α_k = 2^-k, k = 3..12, warm started.
void discount_continuation(const HamiltonianModel& model, const Momentum& P, double sigma,
                           const CellOptions& opt, IterationState& s) {
  ScalarField u = s.u;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int k = 3; k <= 12; ++k) {
    const double alpha = std::ldexp(1.0, -k);
    DiscountedSolution d = solve_discounted(model, P, sigma, alpha, opt, &u);
    s.iterations += d.iterations;
    u = d.u;
    const double estimate = d.Hbar_estimate;
    const bool settled = std::abs(estimate - previous) < opt.tol;
    previous = estimate;
    s.Hbar = estimate;
    if (settled) break;
  }
  normalize_min_zero(u);
  s.controls = improve(model, P, u, nullptr);
  s.residual = residual_from(u, sigma, s.controls, s.Hbar);
  s.u = std::move(u);
}

}  // namespace

DiscountedSolution solve_discounted(const HamiltonianModel& model, const Momentum& P, double sigma,
                                    double alpha, const CellOptions& options,
                                    const ScalarField* initial_u) {
  validate_inputs(model, P, sigma, options);
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "solve_discounted: alpha must be positive");
  const TorusGrid& g = model.grid();
  ScalarField u = initial_u != nullptr ? *initial_u : ScalarField(g);
  Controls controls = improve(model, P, u, nullptr);
  int it = 0;
  for (; it < options.max_iter; ++it) {
    ScalarField next = evaluate_discounted(model, P, sigma, alpha, controls);
    Controls improved = improve(model, P, next, &controls);
    // Compare on the α-scaled value, which stays O(1) as α → 0.
    const double du = alpha * sup_diff(next, u);
    u = std::move(next);
    controls = std::move(improved);
    if (du < options.tol) {
      ++it;
      break;
    }
  }
  const double mean = std::accumulate(u.values().begin(), u.values().end(), 0.0) / u.size();
  return DiscountedSolution{alpha, u, -alpha * mean, drift_of(g, controls), it};
}

CellSolution solve_cell(const HamiltonianModel& model, const Momentum& P, double sigma,
                        const CellOptions& options, const ScalarField* initial_u) {
  validate_inputs(model, P, sigma, options);
  const TorusGrid& g = model.grid();
  if (initial_u != nullptr && !(initial_u->grid() == g)) {
    throw Error(ErrorCode::invalid_argument, "solve_cell: initial u lives on a different grid");
  }

  IterationState s{initial_u != nullptr ? *initial_u : ScalarField(g), {}, 0.0,
                   std::numeric_limits<double>::infinity(), 0};
  s.controls = improve(model, P, s.u, nullptr);

  bool fallback = options.method == CellOptions::Method::discounted;
  Outcome outcome = Outcome::stalled;
  if (!fallback) {
    try {
      outcome = ergodic_policy_iteration(model, P, sigma, options, s, options.max_iter);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::singular_policy_system) throw;
      outcome = Outcome::stalled;
    }
    fallback = outcome != Outcome::converged;
  }
  if (fallback) {
    discount_continuation(model, P, sigma, options, s);
    if (s.residual > options.tol) {
      outcome = ergodic_policy_iteration(model, P, sigma, options, s, options.max_iter);
    } else {
      outcome = Outcome::converged;
    }
  }
  if (outcome != Outcome::converged || !(s.residual <= options.tol)) {
    throw Error(ErrorCode::no_convergence,
                "cell solver did not reach tol after " + std::to_string(s.iterations) +
                    " iterations (residual " + std::to_string(s.residual) + ")");
  }

  VectorField drift = drift_of(g, s.controls);
  return CellSolution{P, sigma, std::move(s.u), s.Hbar, s.residual, std::move(drift), s.iterations, fallback};
}

double cell_residual(const HamiltonianModel& model, const Momentum& P, double sigma,
                     const ScalarField& u, double Hbar) {
  const TorusGrid& g = u.grid();
  const ScalarField lap = laplacian(u);
  const OneSided d(u);
  const double half_s2 = 0.5 * sigma * sigma;
  double r = 0.0;
  Coord f{}, b{};
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    d.at(k, f, b);
    const double hamiltonian =
        -model.upwind_control(k, P, {f.data(), static_cast<std::size_t>(g.dim())},
                              {b.data(), static_cast<std::size_t>(g.dim())})
             .cost;
    r = std::max(r, std::abs(-half_s2 * lap[k] + hamiltonian - Hbar));
  }
  return r;
}

std::vector<SurfacePoint> effective_surface(const HamiltonianModel& model,
                                            const std::vector<Momentum>& momenta, double sigma,
                                            const CellOptions& options) {
  if (momenta.empty()) throw Error(ErrorCode::invalid_argument, "effective_surface: empty momentum list");
  std::vector<std::size_t> order(momenta.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return momenta[a].norm_squared() < momenta[b].norm_squared();
  });
  std::vector<std::optional<SurfacePoint>> slots(momenta.size());
  const ScalarField* warm = nullptr;
  for (std::size_t i : order) {
    CellSolution sol = solve_cell(model, momenta[i], sigma, options, warm);
    const double hbar = sol.Hbar;
    slots[i].emplace(SurfacePoint{momenta[i], hbar, std::move(sol)});
    warm = &slots[i]->solution.u;
  }
  std::vector<SurfacePoint> out;
  out.reserve(momenta.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

double semiconcavity_bound(const CellSolution& solution) {
  const ScalarField& u = solution.u;
  const TorusGrid& g = u.grid();
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    for (int a = 0; a < g.dim(); ++a) {
      m = std::max(m, (u[g.neighbor(k, a, +1)] - 2.0 * u[k] + u[g.neighbor(k, a, -1)]) * inv_h2);
    }
  }
  return m;
}

}  // namespace stochmather
