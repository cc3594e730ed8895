#pragma once

#include <vector>

#include "rtil/linmodel.hpp"

namespace rtil {

// Extra state-action pair harvested from the tube around one demonstration
// step. action_plus = u_check0 + K (state_plus - x_check0), unsaturated.
struct AugmentedPair {
  Vector state_plus;
  Vector action_plus;
  int source_step = -1;
};

// Centers of the 2*nx facets of x_check0 + z_box, in axis order
// (axis 0 upper, axis 0 lower, axis 1 upper, ...). Degenerate axes emit
// duplicates.
std::vector<Vector> sparse_samples(const Vector& x_check0, const BoxSet& z_box);

// All 2^nx vertices of x_check0 + z_box in lexicographic sign order (axis 0
// most significant, lower before upper). Refuses dimensions above 20.
std::vector<Vector> dense_samples(const Vector& x_check0, const BoxSet& z_box);

std::vector<AugmentedPair> label_actions(const std::vector<Vector>& samples,
                                         const Vector& u_check0, const Matrix& K,
                                         const Vector& x_check0, int source_step = -1);

}  // namespace rtil
