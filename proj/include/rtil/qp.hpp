#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rtil/linmodel.hpp"

namespace rtil {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Bounds with magnitude beyond this are treated as absent when testing
// infeasibility certificates.
constexpr double kQpInf = 1e19;

enum class QpStatus { solved, max_iter, infeasible };

const char* to_string(QpStatus s);

struct QpSettings {
  double tol_primal = 1e-6;
  double tol_dual = 1e-6;
  int max_iter = 20000;
  double rho = 1.0;    // fixed penalty
  double sigma = 1e-6; // proximal regularization
  double alpha = 1.6;  // over-relaxation
  int check_every = 10;
};

// Dense convex QP:
//   minimize 0.5 x'Hx + f'x
//   s.t.     Aeq x = beq,  lb <= x <= ub,  bin_lo <= Ain x <= bin_hi
// Aeq/Ain may have zero rows. H is symmetrized on construction of the solver.
struct QpProblem {
  Matrix H;
  Vector f;
  Matrix Aeq;  // 0 x n when absent
  Vector beq;
  Vector lb, ub;
  Matrix Ain;  // 0 x n when absent
  Vector bin_lo, bin_hi;

  int n() const { return static_cast<int>(H.rows()); }
  void validate() const;
};

struct QpSolution {
  Vector x_opt;
  double objective = 0.0;        // 0.5 x'Hx + f'x at x_opt
  double primal_residual = 0.0;  // sup-norm constraint violation surrogate
  double dual_residual = 0.0;    // sup-norm stationarity residual
  int iterations = 0;
  QpStatus status = QpStatus::max_iter;
  Vector multipliers;  // stacked rows [eq; variable box; ineq]
};

struct QpWarmStart {
  Vector x, z, y;
};

// ADMM operator-splitting solver. The constraint operator C = [Aeq; I; Ain]
// and the KKT factorization are fixed at construction; per-solve data (f and
// all bounds) may change freely, which is what the receding-horizon
// controllers rely on. One instance is not reentrant; copy it per thread.
class AdmmQp {
 public:
  AdmmQp(const Matrix& H, const SparseMatrix& Aeq, const SparseMatrix& Ain,
         const QpSettings& settings);

  QpSolution solve(const Vector& f, const Vector& beq, const Vector& lb, const Vector& ub,
                   const Vector& bin_lo, const Vector& bin_hi,
                   const QpWarmStart* warm = nullptr);

  int n() const { return n_; }
  int rows() const { return m_; }
  const QpSettings& settings() const { return settings_; }

 private:
  void apply_c(const Vector& x, Vector& out) const;
  void apply_ct(const Vector& v, Vector& out) const;

  QpSettings settings_;
  int n_, me_, mi_, m_;
  Matrix H_;
  SparseMatrix Aeq_, AeqT_, Ain_, AinT_;
  Eigen::LDLT<Matrix> kkt_;
  // scratch
  Vector x_, z_, y_, cx_, v_, zn_, rhs_, ct_, stat_;
};

// One-shot interface used by tests and non-MPC callers.
QpSolution solve_qp(const QpProblem& problem, double tol_primal = 1e-6,
                    double tol_dual = 1e-6, int max_iter = 20000);

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings,
                    const QpWarmStart* warm = nullptr);

}  // namespace rtil
