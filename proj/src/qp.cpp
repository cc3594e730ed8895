#include "rtil/qp.hpp"

#include <cmath>

namespace rtil {

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::solved: return "solved";
    case QpStatus::max_iter: return "max_iter";
    case QpStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

void QpProblem::validate() const {
  const int nv = n();
  if (H.cols() != nv) throw DimensionError("QpProblem: H must be square");
  if (f.size() != nv) throw DimensionError("QpProblem: f size mismatch");
  if (lb.size() != nv || ub.size() != nv) throw DimensionError("QpProblem: bound size mismatch");
  for (int i = 0; i < nv; ++i)
    if (lb[i] > ub[i]) throw InvalidParameterError("QpProblem: lb > ub on variable " + std::to_string(i));
  if (Aeq.rows() > 0 && Aeq.cols() != nv) throw DimensionError("QpProblem: Aeq column mismatch");
  if (beq.size() != Aeq.rows()) throw DimensionError("QpProblem: beq size mismatch");
  if (Ain.rows() > 0 && Ain.cols() != nv) throw DimensionError("QpProblem: Ain column mismatch");
  if (bin_lo.size() != Ain.rows() || bin_hi.size() != Ain.rows())
    throw DimensionError("QpProblem: inequality bound size mismatch");
  for (int i = 0; i < Ain.rows(); ++i)
    if (bin_lo[i] > bin_hi[i])
      throw InvalidParameterError("QpProblem: empty inequality row " + std::to_string(i));
}

AdmmQp::AdmmQp(const Matrix& H, const SparseMatrix& Aeq, const SparseMatrix& Ain,
               const QpSettings& settings)
    : settings_(settings),
      n_(static_cast<int>(H.rows())),
      me_(static_cast<int>(Aeq.rows())),
      mi_(static_cast<int>(Ain.rows())),
      m_(me_ + n_ + mi_),
      Aeq_(Aeq),
      Ain_(Ain) {
  if (!(settings.tol_primal > 0.0) || !(settings.tol_dual > 0.0))
    throw InvalidParameterError("AdmmQp: tolerances must be positive");
  if (settings.max_iter < 1) throw InvalidParameterError("AdmmQp: max_iter must be >= 1");
  H_ = 0.5 * (H + H.transpose());
  AeqT_ = Aeq_.transpose();
  AinT_ = Ain_.transpose();

  Matrix kkt = H_ + settings_.sigma * Matrix::Identity(n_, n_) +
               settings_.rho * Matrix::Identity(n_, n_);
  if (me_ > 0) kkt += settings_.rho * Matrix(AeqT_ * Aeq_);
  if (mi_ > 0) kkt += settings_.rho * Matrix(AinT_ * Ain_);
  kkt_.compute(kkt);
  if (kkt_.info() != Eigen::Success) throw NumericError("AdmmQp: KKT factorization failed");

  x_.setZero(n_);
  z_.setZero(m_);
  y_.setZero(m_);
  cx_.setZero(m_);
  v_.setZero(m_);
  zn_.setZero(m_);
  rhs_.setZero(n_);
  ct_.setZero(n_);
  stat_.setZero(n_);
}

void AdmmQp::apply_c(const Vector& x, Vector& out) const {
  if (me_ > 0) out.head(me_).noalias() = Aeq_ * x;
  out.segment(me_, n_) = x;
  if (mi_ > 0) out.tail(mi_).noalias() = Ain_ * x;
}

void AdmmQp::apply_ct(const Vector& v, Vector& out) const {
  out = v.segment(me_, n_);
  if (me_ > 0) out.noalias() += AeqT_ * v.head(me_);
  if (mi_ > 0) out.noalias() += AinT_ * v.tail(mi_);
}

QpSolution AdmmQp::solve(const Vector& f, const Vector& beq, const Vector& lb, const Vector& ub,
                         const Vector& bin_lo, const Vector& bin_hi, const QpWarmStart* warm) {
  if (f.size() != n_ || lb.size() != n_ || ub.size() != n_ || beq.size() != me_ ||
      bin_lo.size() != mi_ || bin_hi.size() != mi_)
    throw DimensionError("AdmmQp::solve: argument size mismatch");

  const double rho = settings_.rho;
  const double alpha = settings_.alpha;
  const double sigma = settings_.sigma;

  // stacked row bounds
  Vector lo(m_), hi(m_);
  lo.head(me_) = beq;
  hi.head(me_) = beq;
  lo.segment(me_, n_) = lb;
  hi.segment(me_, n_) = ub;
  lo.tail(mi_) = bin_lo;
  hi.tail(mi_) = bin_hi;

  if (warm && warm->x.size() == n_ && warm->z.size() == m_ && warm->y.size() == m_) {
    x_ = warm->x;
    z_ = warm->z;
    y_ = warm->y;
  } else {
    x_.setZero();
    apply_c(x_, cx_);
    z_ = cx_.cwiseMax(lo).cwiseMin(hi);
    y_.setZero();
  }

  QpSolution sol;
  sol.status = QpStatus::max_iter;
  double prim = std::numeric_limits<double>::infinity();
  double dual = std::numeric_limits<double>::infinity();

  Vector y_snapshot = y_;
  Vector dy(m_);

  int it = 0;
  for (it = 1; it <= settings_.max_iter; ++it) {
    // x-update through the cached factorization
    apply_ct(rho * z_ - y_, ct_);
    rhs_ = sigma * x_ - f + ct_;
    x_ = kkt_.solve(rhs_);

    apply_c(x_, cx_);
    v_ = alpha * cx_ + (1.0 - alpha) * z_;
    zn_ = (v_ + y_ / rho).cwiseMax(lo).cwiseMin(hi);
    y_ += rho * (v_ - zn_);
    z_.swap(zn_);

    bool check = it <= 10 || it % settings_.check_every == 0 || it == settings_.max_iter;
    if (check) {
      prim = (cx_ - z_).cwiseAbs().maxCoeff();
      apply_ct(y_, ct_);
      stat_.noalias() = H_ * x_;
      stat_ += f + ct_;
      dual = stat_.cwiseAbs().maxCoeff();
      if (prim < settings_.tol_primal && dual < settings_.tol_dual) {
        sol.status = QpStatus::solved;
        break;
      }
    }

    if (it % 50 == 0) {
      dy = y_ - y_snapshot;
      y_snapshot = y_;
      double dy_norm = dy.cwiseAbs().maxCoeff();
      if (dy_norm > 1e-12) {
        apply_ct(dy, ct_);
        bool small_image = ct_.cwiseAbs().maxCoeff() <= 1e-6 * dy_norm;
        if (small_image) {
          // support function of the constraint set along dy; +inf bounds
          // require the matching multiplier direction to vanish
          double support = 0.0;
          bool certifiable = true;
          for (int i = 0; i < m_; ++i) {
            double up = std::max(dy[i], 0.0);
            double dn = std::min(dy[i], 0.0);
            if (up > 0.0) {
              if (hi[i] >= kQpInf) {
                if (up > 1e-9 * dy_norm) { certifiable = false; break; }
              } else {
                support += hi[i] * up;
              }
            }
            if (dn < 0.0) {
              if (lo[i] <= -kQpInf) {
                if (-dn > 1e-9 * dy_norm) { certifiable = false; break; }
              } else {
                support += lo[i] * dn;
              }
            }
          }
          if (certifiable && support < -1e-8 * dy_norm) {
            sol.status = QpStatus::infeasible;
            break;
          }
        }
      }
    }
  }

  sol.iterations = std::min(it, settings_.max_iter);
  sol.x_opt = x_.cwiseMax(lb).cwiseMin(ub);
  sol.objective = 0.5 * sol.x_opt.dot(H_ * sol.x_opt) + f.dot(sol.x_opt);
  sol.primal_residual = prim;
  sol.dual_residual = dual;
  sol.multipliers = y_;
  return sol;
}

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings,
                    const QpWarmStart* warm) {
  problem.validate();
  AdmmQp solver(problem.H, problem.Aeq.sparseView(), problem.Ain.sparseView(), settings);
  return solver.solve(problem.f, problem.beq, problem.lb, problem.ub, problem.bin_lo,
                      problem.bin_hi, warm);
}

QpSolution solve_qp(const QpProblem& problem, double tol_primal, double tol_dual, int max_iter) {
  QpSettings s;
  s.tol_primal = tol_primal;
  s.tol_dual = tol_dual;
  s.max_iter = max_iter;
  return solve_qp(problem, s);
}

}  // namespace rtil
