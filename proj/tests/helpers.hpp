#pragma once

// Shared fixtures and independent oracles for the test suites. Oracles here
// must not route through the implementation paths they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "rtil/config.hpp"

namespace rtil::testing {

inline RunConfig desk_config() {
  RunConfig cfg = RunConfig::defaults();
  cfg.horizon = 20;
  return cfg;
}

// Central finite differences of a scalar function of one coordinate.
template <typename F>
double central_diff(F f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Exhaustive grid search over a 2-variable box QP; the brute-force oracle for
// the solver tests.
inline double grid_search_qp2(const Matrix& H, const Vector& f, const Vector& lb,
                              const Vector& ub, double res) {
  double best = std::numeric_limits<double>::infinity();
  const long n0 = static_cast<long>(std::floor((ub[0] - lb[0]) / res));
  const long n1 = static_cast<long>(std::floor((ub[1] - lb[1]) / res));
  for (long i = 0; i <= n0 + 1; ++i) {
    const double x0 = (i <= n0) ? lb[0] + res * static_cast<double>(i) : ub[0];
    const double a = 0.5 * H(0, 0) * x0 * x0 + f[0] * x0;
    const double b = H(0, 1) * x0 + f[1];
    for (long j = 0; j <= n1 + 1; ++j) {
      const double x1 = (j <= n1) ? lb[1] + res * static_cast<double>(j) : ub[1];
      const double v = a + b * x1 + 0.5 * H(1, 1) * x1 * x1;
      if (v < best) best = v;
    }
  }
  return best;
}

// One-step invariance probe for a tube estimate: simulate fresh error
// trajectories under uniform and constant disturbances, take states whose
// tube norm is in [nu_min, 1], scale them onto the tube boundary and check
// that one more step under a fresh disturbance stays inside inflation * Z.
struct ProbeResult {
  long tried = 0;
  long inside = 0;
  double rate() const { return tried == 0 ? 0.0 : static_cast<double>(inside) / tried; }
};

inline ProbeResult probe_tube_invariance(const Matrix& A_K, const BoxSet& W,
                                         const TubeApprox& tube, long target_probes,
                                         uint64_t seed, double inflation = 1.05,
                                         double nu_min = 0.8) {
  const int dim = static_cast<int>(A_K.rows());
  const Vector zu = tube.z_box.upper();
  Rng master(seed);
  ProbeResult res;
  for (uint64_t r = 0; res.tried < target_probes && r < 2000000; ++r) {
    Rng rng = master.child(r);
    bool constant = (r % 2 == 0);
    Vector wc(dim);
    for (int i = 0; i < dim; ++i) wc[i] = rng.uniform(W.lower()[i], W.upper()[i]);
    Vector e = Vector::Zero(dim);
    for (int t = 0; t < 120; ++t) {
      Vector w(dim);
      if (constant) {
        w = wc;
      } else {
        for (int i = 0; i < dim; ++i) w[i] = rng.uniform(W.lower()[i], W.upper()[i]);
      }
      e = A_K * e + w;
      if (t < 15) continue;  // burn-in
      double nu = 0.0;
      for (int i = 0; i < dim; ++i)
        if (zu[i] > 1e-12) nu = std::max(nu, std::abs(e[i]) / zu[i]);
      if (nu < nu_min || nu > 1.0) continue;
      Vector boundary = e / nu;
      Vector fresh(dim);
      for (int i = 0; i < dim; ++i) fresh[i] = rng.uniform(W.lower()[i], W.upper()[i]);
      Vector successor = A_K * boundary + fresh;
      ++res.tried;
      if (tube.contains(successor, inflation)) ++res.inside;
      if (res.tried >= target_probes) break;
    }
  }
  return res;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0.0 : v[v.size() / 2];
}

}  // namespace rtil::testing
