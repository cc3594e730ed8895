#include "rtil/riccati.hpp"

#include <Eigen/Eigenvalues>

namespace rtil {

double spectral_radius(const Matrix& M) {
  Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

// One Riccati update plus the induced gain. Throws NumericError when the
// input-space normal matrix is not invertible.
Matrix riccati_step(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                    const Matrix& P, Matrix* gain_out) {
  Matrix BtP = B.transpose() * P;
  Matrix S = R + BtP * B;
  Eigen::LDLT<Matrix> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw NumericError("solve_dare: R + B'PB not positive definite");
  Matrix K = -ldlt.solve(BtP * A);
  if (gain_out) *gain_out = K;
  Matrix next = A.transpose() * P * A + A.transpose() * P * B * K + Q;
  return 0.5 * (next + next.transpose());
}

}  // namespace

LqrSolution solve_dare(const LtiModel& model, const Matrix& Q, const Matrix& R,
                       double tol, int max_iter) {
  model.validate();
  if (!(tol > 0.0)) throw InvalidParameterError("solve_dare: tol must be positive");
  if (Q.rows() != model.nx || Q.cols() != model.nx)
    throw DimensionError("solve_dare: Q must be nx x nx");
  if (R.rows() != model.nu || R.cols() != model.nu)
    throw DimensionError("solve_dare: R must be nu x nu");

  Matrix P = Q;
  double residual = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Matrix next = riccati_step(model.A, model.B, Q, R, P, nullptr);
    residual = (next - P).cwiseAbs().maxCoeff();
    P = next;
    if (residual < tol) {
      LqrSolution sol;
      sol.P = P;
      riccati_step(model.A, model.B, Q, R, P, &sol.K);
      sol.spectral_radius = spectral_radius(model.A + model.B * sol.K);
      if (sol.spectral_radius >= 1.0)
        throw NonConvergenceError("solve_dare: converged P yields unstable closed loop",
                                  sol.spectral_radius);
      return sol;
    }
  }
  throw NonConvergenceError("solve_dare: no convergence after " + std::to_string(max_iter) +
                                " iterations (is (A,B) stabilizable?)",
                            residual);
}

double dare_residual(const LtiModel& model, const Matrix& Q, const Matrix& R, const Matrix& P) {
  Matrix next = riccati_step(model.A, model.B, Q, R, P, nullptr);
  return (next - P).cwiseAbs().maxCoeff();
}

}  // namespace rtil
