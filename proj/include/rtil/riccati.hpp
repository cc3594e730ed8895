#pragma once

#include "rtil/linmodel.hpp"

namespace rtil {

// Infinite-horizon discrete-time LQR solution. Gain convention is u = K x,
// i.e. K carries the minus sign and A_K = A + B K is the closed loop.
struct LqrSolution {
  Matrix P;               // value matrix, symmetric positive definite
  Matrix K;               // feedback gain, nu x nx
  double spectral_radius; // of A + B K, < 1 on success

  Matrix closed_loop(const Matrix& A, const Matrix& B) const { return A + B * K; }
};

double spectral_radius(const Matrix& M);

// Fixed-point iteration on the discrete algebraic Riccati equation
//   P <- A'PA - A'PB (R + B'PB)^-1 B'PA + Q
// until the sup-norm update falls below tol. Throws NonConvergenceError when
// max_iter is exhausted and NumericError when R + B'PB cannot be factored.
LqrSolution solve_dare(const LtiModel& model, const Matrix& Q, const Matrix& R,
                       double tol = 1e-10, int max_iter = 100000);

// Sup-norm residual of P under one more iteration; used by tests and the
// acceptance suite.
double dare_residual(const LtiModel& model, const Matrix& Q, const Matrix& R, const Matrix& P);

}  // namespace rtil
