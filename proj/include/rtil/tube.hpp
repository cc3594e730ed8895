#pragma once

#include "rtil/linmodel.hpp"

namespace rtil {

// Hyper-rectangle outer approximation of the disturbance-invariant set of
// e+ = A_K e + w, w in W, obtained by Monte-Carlo rollouts plus constant
// vertex-sequence rollouts, symmetrized per axis.
struct TubeApprox {
  BoxSet z_box;
  long samples_used = 0;   // uniform rollouts + vertex sequences
  int horizon_used = 0;
  uint64_t seed = 0;
  // false when the envelope was still growing by >1% over the last 10% of
  // the horizon on some axis
  bool converged = true;

  bool contains(const Vector& e, double inflation = 1.0) const;
};

TubeApprox estimate_invariant_box(const Matrix& A_K, const BoxSet& W, long n_rollouts,
                                  int horizon, uint64_t seed, int workers = 1);

bool contains(const TubeApprox& tube, const Vector& e, double inflation);

}  // namespace rtil
