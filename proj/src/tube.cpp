#include "rtil/tube.hpp"

#include <algorithm>
#include <vector>

#include "rtil/riccati.hpp"

namespace rtil {

bool TubeApprox::contains(const Vector& e, double inflation) const {
  return rtil::contains(*this, e, inflation);
}

bool contains(const TubeApprox& tube, const Vector& e, double inflation) {
  if (inflation < 1.0) throw InvalidParameterError("contains: inflation must be >= 1");
  if (e.size() != tube.z_box.dim()) throw DimensionError("contains: dimension mismatch");
  return tube.z_box.scaled(inflation).contains(e);
}

namespace {

// Running per-time-step envelope of |e| for one batch of rollouts;
// env is horizon x dim, env(t, i) = max over rollouts, s <= t of |e_s[i]|.
struct Envelope {
  Matrix env;  // prefix maxima
  explicit Envelope(int horizon, int dim) : env(Matrix::Zero(horizon, dim)) {}

  void merge(const Envelope& other) { env = env.cwiseMax(other.env); }
};

void roll_uniform(const Matrix& A_K, const BoxSet& W, int horizon, Rng rng, Envelope& out) {
  const int dim = static_cast<int>(A_K.rows());
  Vector e = Vector::Zero(dim);
  Vector w(dim);
  Vector next(dim);
  Vector running = Vector::Zero(dim);
  for (int t = 0; t < horizon; ++t) {
    for (int i = 0; i < dim; ++i) w[i] = rng.uniform(W.lower()[i], W.upper()[i]);
    next.noalias() = A_K * e;
    next += w;
    e = next;
    running = running.cwiseMax(e.cwiseAbs());
    out.env.row(t) = out.env.row(t).cwiseMax(running.transpose());
  }
}

void roll_vertex(const Matrix& A_K, const Vector& w, int horizon, Envelope& out) {
  const int dim = static_cast<int>(A_K.rows());
  Vector e = Vector::Zero(dim);
  Vector next(dim);
  Vector running = Vector::Zero(dim);
  for (int t = 0; t < horizon; ++t) {
    next.noalias() = A_K * e;
    next += w;
    e = next;
    running = running.cwiseMax(e.cwiseAbs());
    out.env.row(t) = out.env.row(t).cwiseMax(running.transpose());
  }
}

}  // namespace

TubeApprox estimate_invariant_box(const Matrix& A_K, const BoxSet& W, long n_rollouts,
                                  int horizon, uint64_t seed, int workers) {
  const int dim = static_cast<int>(A_K.rows());
  if (A_K.cols() != dim) throw DimensionError("estimate_invariant_box: A_K must be square");
  if (W.dim() != dim) throw DimensionError("estimate_invariant_box: W dimension mismatch");
  if (horizon < 1) throw InvalidParameterError("estimate_invariant_box: horizon must be >= 1");
  if (n_rollouts < 1) throw InvalidParameterError("estimate_invariant_box: need >= 1 rollout");
  if (dim > 20) throw InvalidParameterError("estimate_invariant_box: dimension too large");
  if (spectral_radius(A_K) >= 1.0)
    throw InvalidParameterError("estimate_invariant_box: A_K is not stable");

  Rng master(seed);

  const int nchunks = static_cast<int>(std::max<long>(1, std::min<long>(workers * 4L, n_rollouts)));
  std::vector<Envelope> chunk_env(nchunks, Envelope(horizon, dim));
  parallel_for(nchunks, workers, [&](int c) {
    long begin = n_rollouts * c / nchunks;
    long end = n_rollouts * (c + 1) / nchunks;
    for (long r = begin; r < end; ++r)
      roll_uniform(A_K, W, horizon, master.child(static_cast<uint64_t>(r)), chunk_env[c]);
  });
  Envelope env(horizon, dim);
  for (const auto& ce : chunk_env) env.merge(ce);

  // adversarial floor: every vertex of W held constant over the horizon
  const long n_vertex = 1L << dim;
  Vector w(dim);
  for (long mask = 0; mask < n_vertex; ++mask) {
    for (int i = 0; i < dim; ++i)
      w[i] = ((mask >> (dim - 1 - i)) & 1) ? W.upper()[i] : W.lower()[i];
    roll_vertex(A_K, w, horizon, env);
  }

  Vector half = env.env.row(horizon - 1).transpose();

  TubeApprox tube;
  tube.z_box = BoxSet::symmetric(half);
  tube.samples_used = n_rollouts + n_vertex;
  tube.horizon_used = horizon;
  tube.seed = seed;

  const int t_ref = std::max(0, horizon - std::max(1, horizon / 10) - 1);
  tube.converged = true;
  for (int i = 0; i < dim; ++i) {
    double ref = env.env(t_ref, i);
    if (env.env(horizon - 1, i) > 1.01 * ref + 1e-12) tube.converged = false;
  }
  return tube;
}

}  // namespace rtil
