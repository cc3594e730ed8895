#include "rtil/augment.hpp"

namespace rtil {

std::vector<Vector> sparse_samples(const Vector& x_check0, const BoxSet& z_box) {
  const int nx = z_box.dim();
  if (x_check0.size() != nx) throw DimensionError("sparse_samples: dimension mismatch");
  std::vector<Vector> out;
  out.reserve(2 * nx);
  for (int i = 0; i < nx; ++i) {
    Vector hi = x_check0;
    hi[i] += z_box.upper()[i];
    out.push_back(std::move(hi));
    Vector lo = x_check0;
    lo[i] += z_box.lower()[i];
    out.push_back(std::move(lo));
  }
  return out;
}

std::vector<Vector> dense_samples(const Vector& x_check0, const BoxSet& z_box) {
  const int nx = z_box.dim();
  if (x_check0.size() != nx) throw DimensionError("dense_samples: dimension mismatch");
  if (nx > 20)
    throw InvalidParameterError("dense_samples: 2^" + std::to_string(nx) +
                                " vertices is too many (dimension cap is 20)");
  const long count = 1L << nx;
  std::vector<Vector> out;
  out.reserve(count);
  for (long mask = 0; mask < count; ++mask) {
    Vector v = x_check0;
    for (int i = 0; i < nx; ++i)
      v[i] += ((mask >> (nx - 1 - i)) & 1) ? z_box.upper()[i] : z_box.lower()[i];
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<AugmentedPair> label_actions(const std::vector<Vector>& samples,
                                         const Vector& u_check0, const Matrix& K,
                                         const Vector& x_check0, int source_step) {
  if (K.cols() != x_check0.size() || K.rows() != u_check0.size())
    throw DimensionError("label_actions: gain dimension mismatch");
  std::vector<AugmentedPair> out;
  out.reserve(samples.size());
  for (const Vector& xp : samples) {
    if (xp.size() != x_check0.size()) throw DimensionError("label_actions: sample dimension mismatch");
    AugmentedPair pair;
    pair.state_plus = xp;
    pair.action_plus = u_check0 + K * (xp - x_check0);
    pair.source_step = source_step;
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace rtil
