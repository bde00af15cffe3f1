#include "stochmather/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SparseLU>

#include "stochmather/error.hpp"

namespace stochmather {

namespace {

using SparseRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseCol = Eigen::SparseMatrix<double, Eigen::ColMajor>;

EigenBracket collatz_wielandt(const SparseRow& op, const Eigen::VectorXd& psi) {
  const Eigen::VectorXd lp = op * psi;
  EigenBracket b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double r = lp[i] / psi[i];
    b.lower = std::min(b.lower, r);
    b.upper = std::max(b.upper, r);
  }
  return b;
}

}  // namespace

SparseRow tilted_operator(const ScalarField& V, const Momentum& P, double sigma) {
  const TorusGrid& g = V.grid();
  if (P.dim() != g.dim()) throw Error(ErrorCode::invalid_argument, "tilted_operator: P dimension differs from grid");
  const double s2 = sigma * sigma;
  VectorField drift(g);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    for (int a = 0; a < g.dim(); ++a) drift(k, a) = -s2 * P[a];
  }
  SparseRow op = drift_diffusion_matrix(g, 0.5 * s2 * s2, drift);
  const double tilt = 0.5 * P.norm_squared();
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    op.coeffRef(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) += V[k] + tilt;
  }
  return op;
}

EigenSolution principal_eigenvalue(const ScalarField& V, const Momentum& P, double sigma,
                                   const SpectralOptions& options) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "principal_eigenvalue: sigma must be positive");
  const TorusGrid& g = V.grid();
  const SparseRow op = tilted_operator(V, P, sigma);
  const auto n = static_cast<Eigen::Index>(g.node_count());
  const double h = g.spacing();
  const double s4 = std::pow(sigma, 4);
  double shift = V.max() + 0.5 * P.norm_squared() + s4 / (h * h) + 1.0;

  SparseCol identity(n, n);
  identity.setIdentity();
  Eigen::VectorXd psi = Eigen::VectorXd::Ones(n);
  EigenSolution out{0.0, ScalarField(g), sigma, P, 0.0, 0, {}};
  out.history.push_back(collatz_wielandt(op, psi));

  double estimate = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  Eigen::SparseLU<SparseCol> lu;
  bool refactor = true;
  for (int it = 0; it < options.max_iter && !converged; ++it) {
    if (refactor) {
      const SparseCol a = shift * identity - SparseCol(op);
      lu.compute(a);
      if (lu.info() != Eigen::Success) {
        throw Error(ErrorCode::non_positive_eigenfunction, "principal_eigenvalue: shifted operator is singular");
      }
      refactor = false;
    }
    Eigen::VectorXd y = lu.solve(psi);
    // y = (sI - L)^{-1} ψ; Perron root of the inverse is 1/(s - λ).
    double nu_min = std::numeric_limits<double>::infinity();
    double nu_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(y[i] > 0.0)) {
        throw Error(ErrorCode::non_positive_eigenfunction,
                    "principal_eigenvalue: iterate lost positivity; refine the grid");
      }
      const double r = y[i] / psi[i];
      nu_min = std::min(nu_min, r);
      nu_max = std::max(nu_max, r);
    }
    psi = y / y.maxCoeff();
    ++out.iterations;
    out.history.push_back(collatz_wielandt(op, psi));

    const double lower = shift - 1.0 / nu_min;
    const double upper = shift - 1.0 / nu_max;
    estimate = 0.5 * (lower + upper);
    if (upper - lower <= options.tol) {
      converged = true;
      break;
    }
    const double gap = std::max(upper - lower, 1e-6 * (1.0 + std::abs(upper)));
    const double next_shift = upper + gap;
    if (next_shift < shift) {
      shift = next_shift;
      refactor = true;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::no_convergence,
                "principal_eigenvalue: no convergence in " + std::to_string(options.max_iter) + " iterations");
  }

  out.eigenvalue = estimate;
  const Eigen::VectorXd res = op * psi - estimate * psi;
  out.residual = res.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) out.eigenfunction[static_cast<std::size_t>(i)] = psi[i];
  return out;
}

ScalarField u_from_eigenfunction(const EigenSolution& eig) {
  const ScalarField& psi = eig.eigenfunction;
  ScalarField u(psi.grid());
  const double s2 = eig.sigma * eig.sigma;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    if (!(psi[k] > 0.0)) throw Error(ErrorCode::non_positive_eigenfunction, "u_from_eigenfunction: psi must be positive");
    u[k] = -s2 * std::log(psi[k]);
  }
  const double m = u.min();
  for (double& x : u.values()) x -= m;
  return u;
}

ScalarField explicit_theta(const ScalarField& u, const Momentum& P, double sigma) {
  for (double p : P.values()) {
    if (p != 0.0) {
      throw Error(ErrorCode::nonzero_momentum,
                  "explicit_theta: e^{-2(Px+u)/sigma^2} is a probability density only for P = 0");
    }
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "explicit_theta: sigma must be positive");
  ScalarField theta(u.grid());
  const double umin = u.min();
  const double scale = 2.0 / (sigma * sigma);
  for (std::size_t k = 0; k < u.size(); ++k) theta[k] = std::exp(-scale * (u[k] - umin));
  const double mass = integrate(theta);
  for (double& x : theta.values()) x /= mass;
  return theta;
}

}  // namespace stochmather
