#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include "lscdr/common.hpp"

namespace lscdr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Inequality rows a_i . x <= b_i in compressed sparse row form.
struct SparseRows {
  std::vector<int> start{0};
  std::vector<int> col;
  std::vector<double> val;
  std::vector<double> rhs;

  int size() const { return static_cast<int>(rhs.size()); }
  void clear() {
    start.assign(1, 0);
    col.clear();
    val.clear();
    rhs.clear();
  }
  void add(std::initializer_list<std::pair<int, double>> entries, double b) {
    for (auto [c, v] : entries) {
      col.push_back(c);
      val.push_back(v);
    }
    start.push_back(static_cast<int>(col.size()));
    rhs.push_back(b);
  }
  void add_dense(const VectorXd& a, double b) {
    for (int c = 0; c < a.size(); ++c)
      if (a[c] != 0.0) {
        col.push_back(c);
        val.push_back(a[c]);
      }
    start.push_back(static_cast<int>(col.size()));
    rhs.push_back(b);
  }
  double dot(int r, const VectorXd& x) const {
    double s = 0.0;
    for (int k = start[r]; k < start[r + 1]; ++k) s += val[k] * x[col[k]];
    return s;
  }
  double slack(int r, const VectorXd& x) const { return rhs[r] - dot(r, x); }
};

/// The parts of a QP that stay fixed while the linear term, the equality
/// right-hand side and the inequality rows change: Hessian H, equality matrix
/// A_eq, and the null-space factorization used by the solver.
class QpStructure {
 public:
  QpStructure(MatrixXd hessian, MatrixXd a_eq) : H_(std::move(hessian)), Aeq_(std::move(a_eq)) {
    const int nv = static_cast<int>(H_.rows());
    if (H_.cols() != nv) throw ConfigError("Hessian must be square");
    if (Aeq_.rows() > 0 && Aeq_.cols() != nv) throw ConfigError("equality matrix width mismatch");
    if ((H_ - H_.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + H_.cwiseAbs().maxCoeff()))
      throw ConfigError("Hessian must be symmetric");
    if (Aeq_.rows() == 0) {
      Z_ = MatrixXd::Identity(nv, nv);
    } else {
      Eigen::ColPivHouseholderQR<MatrixXd> qr(Aeq_.transpose());
      qr.setThreshold(1e-10);
      rank_ = static_cast<int>(qr.rank());
      if (rank_ < Aeq_.rows()) throw ConfigError("equality rows are linearly dependent");
      const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(nv, nv);
      Z_ = Q.rightCols(nv - rank_);
      eq_solver_ = (Aeq_ * Aeq_.transpose()).ldlt();
    }
    const MatrixXd Hr = Z_.transpose() * H_ * Z_;
    Eigen::LLT<MatrixXd> llt(Hr);
    if (llt.info() != Eigen::Success) throw ConfigError("reduced Hessian is not positive definite");
    // T = Z L^{-T}: x = x0 + T y turns the objective into 1/2 |y|^2 + c^T y.
    const MatrixXd Linv = llt.matrixL().solve(MatrixXd::Identity(Hr.rows(), Hr.cols()));
    T_ = Z_ * Linv.transpose();
    Tt_ = T_.transpose();
  }

  int num_vars() const { return static_cast<int>(H_.rows()); }
  int reduced_dim() const { return static_cast<int>(Z_.cols()); }
  const MatrixXd& hessian() const { return H_; }
  const MatrixXd& a_eq() const { return Aeq_; }
  const MatrixXd& null_space() const { return Z_; }
  const MatrixXd& transform() const { return T_; }
  const MatrixXd& transform_t() const { return Tt_; }

  /// Closest point to x satisfying A_eq x = b.
  VectorXd project(const VectorXd& x, const VectorXd& b) const {
    if (Aeq_.rows() == 0) return x;
    return x - Aeq_.transpose() * eq_solver_.solve(Aeq_ * x - b);
  }

 private:
  MatrixXd H_, Aeq_, Z_, T_, Tt_;
  int rank_ = 0;
  Eigen::LDLT<MatrixXd> eq_solver_;
};

/// minimize 1/2 x^T H x + f^T x + constant  s.t.  A_eq x = b_eq,  rows(x) <= rhs.
struct QpProblem {
  std::shared_ptr<const QpStructure> structure;
  VectorXd f;
  double constant = 0.0;
  VectorXd b_eq;
  SparseRows ineq;
  VectorXd warm_start;  // empty: start from the least-norm equality solution

  double objective(const VectorXd& x) const {
    return 0.5 * x.dot(structure->hessian() * x) + f.dot(x) + constant;
  }
};

struct QpSolution {
  VectorXd x;
  VectorXd lambda;  // one multiplier per inequality row
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double stationarity = 0.0;     // |Z^T (Hx + f + A^T lambda)|_inf
  double primal_eq = 0.0;        // |A_eq x - b_eq|_inf
  double primal_ineq = 0.0;      // max(0, max_i a_i x - b_i)
  double complementarity = 0.0;  // max_i |lambda_i * slack_i|
  double dual_min = 0.0;         // min_i lambda_i
};

struct QpOptions {
  int max_iterations = 5000;
  double feasibility_tol = tol::kPrimal;
  int degenerate_before_bland = 20;
};

namespace detail {

inline void givens(double a, double b, double& c, double& s) {
  if (b == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  const double r = std::hypot(a, b);
  c = a / r;
  s = b / r;
}

/// Orthogonal factorization Q [R; 0] of the working-set columns.
class WorkingQr {
 public:
  explicit WorkingQr(int dim) : Q_(MatrixXd::Identity(dim, dim)), R_(MatrixXd::Zero(dim, dim)) {}

  int size() const { return t_; }
  int dim() const { return static_cast<int>(Q_.rows()); }
  const MatrixXd& Q() const { return Q_; }
  const MatrixXd& R() const { return R_; }

  /// Appends column a; returns false (and leaves the factorization) when a is
  /// numerically dependent on the current columns.
  bool add(const VectorXd& a) {
    const int n = dim();
    if (t_ >= n) return false;
    VectorXd w = Q_.transpose() * a;
    for (int i = n - 1; i > t_; --i) {
      double c, s;
      givens(w[i - 1], w[i], c, s);
      if (s == 0.0) continue;
      w[i - 1] = c * w[i - 1] + s * w[i];
      w[i] = 0.0;
      for (int r = 0; r < n; ++r) {
        const double q0 = Q_(r, i - 1), q1 = Q_(r, i);
        Q_(r, i - 1) = c * q0 + s * q1;
        Q_(r, i) = -s * q0 + c * q1;
      }
    }
    // On rejection the rotations have only re-based the free block of Q.
    if (std::abs(w[t_]) <= 1e-10 * std::max(1.0, a.norm())) return false;
    R_.col(t_).head(t_ + 1) = w.head(t_ + 1);
    ++t_;
    return true;
  }

  void remove(int j) {
    const int n = dim();
    for (int c = j; c < t_ - 1; ++c) R_.col(c).head(c + 2) = R_.col(c + 1).head(c + 2);
    R_.col(t_ - 1).setZero();
    for (int c = j; c < t_ - 1; ++c) {
      double cs, sn;
      givens(R_(c, c), R_(c + 1, c), cs, sn);
      if (sn == 0.0) continue;
      for (int k = c; k < t_ - 1; ++k) {
        const double r0 = R_(c, k), r1 = R_(c + 1, k);
        R_(c, k) = cs * r0 + sn * r1;
        R_(c + 1, k) = -sn * r0 + cs * r1;
      }
      R_(c + 1, c) = 0.0;
      for (int r = 0; r < n; ++r) {
        const double q0 = Q_(r, c), q1 = Q_(r, c + 1);
        Q_(r, c) = cs * q0 + sn * q1;
        Q_(r, c + 1) = -sn * q0 + cs * q1;
      }
    }
    --t_;
  }

 private:
  MatrixXd Q_, R_;
  int t_ = 0;
};

}  // namespace detail

/// Primal active-set method started from a feasible warm start. The problem is
/// reduced to the null space of the equality rows and whitened so the Hessian
/// becomes the identity; working-set changes are rank-one QR updates.
inline QpSolution solve_qp(const QpProblem& p, const QpOptions& opt = {}) {
  const QpStructure& S = *p.structure;
  const int nv = S.num_vars(), nr = S.reduced_dim(), m = p.ineq.size();
  const MatrixXd& T = S.transform();
  const MatrixXd& Tt = S.transform_t();
  const SparseRows& A = p.ineq;

  // Starting point: warm start projected on the equalities.
  VectorXd x;
  if (p.warm_start.size() == nv) {
    if (S.a_eq().rows() > 0) {
      const VectorXd res = S.a_eq() * p.warm_start - p.b_eq;
      Eigen::Index worst = 0;
      const double viol = res.size() ? res.cwiseAbs().maxCoeff(&worst) : 0.0;
      if (viol > opt.feasibility_tol)
        throw InfeasibleError("warm start violates equality row " + std::to_string(worst),
                              -1 - static_cast<long>(worst), viol);
    }
    x = S.project(p.warm_start, p.b_eq);
  } else {
    x = S.project(VectorXd::Zero(nv), p.b_eq);
  }

  std::vector<double> slack(m);
  {
    long worst = -1;
    double viol = 0.0;
    for (int i = 0; i < m; ++i) {
      slack[i] = A.slack(i, x);
      if (-slack[i] > viol) {
        viol = -slack[i];
        worst = i;
      }
    }
    if (viol > opt.feasibility_tol)
      throw InfeasibleError("start point violates inequality row " + std::to_string(worst), worst,
                            viol);
  }

  auto reduced_row = [&](int r) {
    VectorXd a = VectorXd::Zero(nr);
    for (int k = A.start[r]; k < A.start[r + 1]; ++k) a += A.val[k] * Tt.col(A.col[k]);
    return a;
  };

  VectorXd g = Tt * (S.hessian() * x + p.f);  // gradient at y = 0
  detail::WorkingQr qr(nr);
  std::vector<int> work;  // row ids, in QR column order
  std::vector<char> in_work(m, 0);
  std::vector<double> ad(m);
  VectorXd pstep(nr), dx(nv), lam;
  int degenerate = 0;
  QpSolution sol;

  const double step_tol = 1e-13 * (1.0 + g.cwiseAbs().maxCoeff());
  for (sol.iterations = 0; sol.iterations < opt.max_iterations; ++sol.iterations) {
    const int t = qr.size();
    if (t < nr) {
      const auto Q2 = qr.Q().rightCols(nr - t);
      pstep.noalias() = -(Q2 * (Q2.transpose() * g));
    } else {
      pstep.setZero();
    }

    if (pstep.cwiseAbs().maxCoeff() <= step_tol) {
      if (t == 0) {
        sol.converged = true;
        break;
      }
      lam = -(qr.R().topLeftCorner(t, t).triangularView<Eigen::Upper>().solve(
          qr.Q().leftCols(t).transpose() * g));
      int drop = -1;
      const bool bland = degenerate >= opt.degenerate_before_bland;
      for (int c = 0; c < t; ++c) {
        if (lam[c] >= -1e-12) continue;
        if (drop < 0 || (bland ? work[c] < work[drop] : lam[c] < lam[drop])) drop = c;
      }
      if (drop < 0) {
        sol.converged = true;
        break;
      }
      in_work[work[drop]] = 0;
      work.erase(work.begin() + drop);
      qr.remove(drop);
      continue;
    }

    dx.noalias() = T * pstep;
    double alpha = 1.0;
    int block = -1;
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int k = A.start[i]; k < A.start[i + 1]; ++k) s += A.val[k] * dx[A.col[k]];
      ad[i] = s;
      if (in_work[i] || s <= 1e-12) continue;
      const double ratio = std::max(slack[i], 0.0) / s;
      if (ratio < alpha) {
        alpha = ratio;
        block = i;
      }
    }
    x.noalias() += alpha * dx;
    g.noalias() += alpha * pstep;
    for (int i = 0; i < m; ++i) slack[i] -= alpha * ad[i];
    degenerate = alpha == 0.0 ? degenerate + 1 : 0;
    if (block >= 0) {
      if (qr.add(reduced_row(block))) {
        work.push_back(block);
        in_work[block] = 1;
      }
    }
  }

  // Multipliers and residuals in the original space.
  sol.lambda = VectorXd::Zero(m);
  if (qr.size() > 0) {
    const int t = qr.size();
    lam = -(qr.R().topLeftCorner(t, t).triangularView<Eigen::Upper>().solve(
        qr.Q().leftCols(t).transpose() * g));
    for (int c = 0; c < t; ++c) sol.lambda[work[c]] = std::max(lam[c], 0.0);
  }
  VectorXd grad = S.hessian() * x + p.f;
  for (int i = 0; i < m; ++i)
    if (sol.lambda[i] != 0.0)
      for (int k = A.start[i]; k < A.start[i + 1]; ++k) grad[A.col[k]] += sol.lambda[i] * A.val[k];
  sol.stationarity = nr ? (S.null_space().transpose() * grad).cwiseAbs().maxCoeff() : 0.0;
  sol.primal_eq = S.a_eq().rows() ? (S.a_eq() * x - p.b_eq).cwiseAbs().maxCoeff() : 0.0;
  for (int i = 0; i < m; ++i) {
    const double s = A.slack(i, x);
    sol.primal_ineq = std::max(sol.primal_ineq, -s);
    sol.complementarity = std::max(sol.complementarity, std::abs(sol.lambda[i] * s));
  }
  sol.dual_min = m ? sol.lambda.minCoeff() : 0.0;
  sol.objective = p.objective(x);
  sol.x = std::move(x);
  return sol;
}

}  // namespace lscdr
