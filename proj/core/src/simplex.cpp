#include "stochmather/simplex.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stochmather/error.hpp"

namespace stochmather {

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class TableauSolver {
 public:
  TableauSolver(const LinearProgram& lp, const SimplexOptions& opt)
      : m_(lp.A.rows()), n_(lp.A.cols()), opt_(opt), sign_(m_) {
    // Columns: n structural, m artificial, rhs. Last row holds reduced costs
    // and minus the objective value.
    t_ = Tableau::Zero(m_ + 1, n_ + m_ + 1);
    for (Eigen::Index i = 0; i < m_; ++i) {
      sign_[i] = lp.b[i] < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign_[i] * lp.A.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign_[i] * lp.b[i];
    }
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = static_cast<std::size_t>(n_ + i);
  }

  SimplexResult run(const LinearProgram& lp) {
    // Phase one: minimize the sum of artificials.
    t_.row(m_).setZero();
    for (Eigen::Index i = 0; i < m_; ++i) {
      t_.row(m_).head(n_) -= t_.row(i).head(n_);
      t_(m_, rhs()) -= t_(i, rhs());
    }
    iterate(n_ + m_);
    const double infeasibility = -t_(m_, rhs());
    const double scale = std::max(1.0, lp.b.cwiseAbs().maxCoeff());
    if (infeasibility > opt_.feasibility_tol * scale) {
      throw Error(ErrorCode::infeasible,
                  "simplex: phase one ended with infeasibility " + std::to_string(infeasibility));
    }
    drive_out_artificials();

    // Phase two on the structural columns only.
    t_.row(m_).setZero();
    t_.row(m_).head(n_) = lp.c.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const std::size_t j = basis_[static_cast<std::size_t>(i)];
      const double cj = j < static_cast<std::size_t>(n_) ? lp.c[static_cast<Eigen::Index>(j)] : 0.0;
      if (cj != 0.0) t_.row(m_) -= cj * t_.row(i);
    }
    iterate(n_);

    SimplexResult r;
    r.x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const std::size_t j = basis_[static_cast<std::size_t>(i)];
      if (j < static_cast<std::size_t>(n_)) r.x[static_cast<Eigen::Index>(j)] = t_(i, rhs());
    }
    r.y.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) r.y[i] = -sign_[i] * t_(m_, n_ + i);
    refine(lp, r);
    r.value = lp.c.dot(r.x);
    r.pivots = pivots_;
    r.basis = basis_;
    return r;
  }

 private:
  Eigen::Index rhs() const { return n_ + m_; }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = static_cast<std::size_t>(col);
    if (++pivots_ > opt_.max_pivots) {
      throw Error(ErrorCode::pivot_limit, "simplex: pivot limit reached");
    }
  }

  // Bland: lowest-index improving column; among minimum-ratio rows the one
  // whose basic variable has the lowest index.
  void iterate(Eigen::Index eligible_columns) {
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < eligible_columns; ++j) {
        if (t_(m_, j) < -opt_.pivot_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;

      Eigen::Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= opt_.pivot_tol) continue;
        const double ratio = t_(i, rhs()) / a;
        const bool tie = std::abs(ratio - best_ratio) <= 1e-12 * std::max(1.0, std::abs(best_ratio));
        if (leave < 0 || (ratio < best_ratio && !tie) ||
            (tie && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          if (leave < 0 || !tie) best_ratio = ratio;
          leave = i;
        }
      }
      if (leave < 0) throw Error(ErrorCode::unbounded, "simplex: objective is unbounded below");
      pivot(leave, enter);
    }
  }

  // Recompute x_B = B⁻¹b and y = B⁻ᵀc_B from the original data; the
  // tableau accumulates rounding over many pivots.
  void refine(const LinearProgram& lp, SimplexResult& r) const {
    Eigen::MatrixXd B(m_, m_);
    Eigen::VectorXd cB(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const std::size_t j = basis_[static_cast<std::size_t>(i)];
      if (j < static_cast<std::size_t>(n_)) {
        B.col(i) = lp.A.col(static_cast<Eigen::Index>(j));
        cB[i] = lp.c[static_cast<Eigen::Index>(j)];
      } else {
        B.col(i).setZero();
        B(static_cast<Eigen::Index>(j) - n_, i) = sign_[static_cast<Eigen::Index>(j) - n_];
        cB[i] = 0.0;
      }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    const Eigen::VectorXd xB = lu.solve(lp.b);
    const Eigen::VectorXd y = lu.transpose().solve(cB);
    if (!xB.allFinite() || !y.allFinite()) return;
    // Keep the tableau values if the refined ones are worse.
    const double old_res = (lp.A * r.x - lp.b).cwiseAbs().maxCoeff();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const std::size_t j = basis_[static_cast<std::size_t>(i)];
      if (j < static_cast<std::size_t>(n_)) x[static_cast<Eigen::Index>(j)] = std::max(0.0, xB[i]);
    }
    if ((lp.A * x - lp.b).cwiseAbs().maxCoeff() <= old_res) r.x = x;
    const double old_inf = std::max(0.0, -(lp.c - lp.A.transpose() * r.y).minCoeff());
    if (std::max(0.0, -(lp.c - lp.A.transpose() * y).minCoeff()) <= old_inf) r.y = y;
  }

  void drive_out_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < static_cast<std::size_t>(n_)) continue;
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > opt_.pivot_tol) {
          col = j;
          break;
        }
      }
      // A row without structural entries is redundant; its artificial stays
      // basic at level zero.
      if (col >= 0) pivot(i, col);
    }
  }

  Eigen::Index m_;
  Eigen::Index n_;
  SimplexOptions opt_;
  Eigen::VectorXd sign_;
  Tableau t_;
  std::vector<std::size_t> basis_;
  std::size_t pivots_ = 0;
};

}  // namespace

SimplexResult solve_simplex(const LinearProgram& lp, const SimplexOptions& options) {
  if (lp.A.rows() != lp.b.size() || lp.A.cols() != lp.c.size()) {
    throw Error(ErrorCode::invalid_argument, "simplex: inconsistent LP dimensions");
  }
  TableauSolver solver(lp, options);
  return solver.run(lp);
}

}  // namespace stochmather
