#include "rtil/rtmpc.hpp"

#include <chrono>

namespace rtil {

namespace {

Matrix build_hessian(const CostWeights& w, int nx, int nu, int N) {
  const int n = (N + 1) * nx + N * nu;
  Matrix H = Matrix::Zero(n, n);
  for (int k = 0; k < N; ++k) H.block(k * nx, k * nx, nx, nx) = 2.0 * w.Q;
  H.block(N * nx, N * nx, nx, nx) = 2.0 * w.P;
  const int u_off = (N + 1) * nx;
  for (int k = 0; k < N; ++k) H.block(u_off + k * nu, u_off + k * nu, nu, nu) = 2.0 * w.R;
  return H;
}

SparseMatrix build_dynamics(const LtiModel& m, int N) {
  const int nx = m.nx, nu = m.nu;
  const int u_off = (N + 1) * nx;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(N) * nx * (nx + nu + 1));
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < nx; ++i) {
      trip.emplace_back(k * nx + i, (k + 1) * nx + i, 1.0);
      for (int j = 0; j < nx; ++j)
        if (m.A(i, j) != 0.0) trip.emplace_back(k * nx + i, k * nx + j, -m.A(i, j));
      for (int j = 0; j < nu; ++j)
        if (m.B(i, j) != 0.0) trip.emplace_back(k * nx + i, u_off + k * nu + j, -m.B(i, j));
    }
  }
  SparseMatrix Aeq(N * nx, (N + 1) * nx + N * nu);
  Aeq.setFromTriplets(trip.begin(), trip.end());
  return Aeq;
}

}  // namespace

TrackingMpc::TrackingMpc(const LtiModel& model, const CostWeights& weights, BoxSet X_run,
                         BoxSet U_run, BoxSet U_sat, BoxSet init_offset, Matrix K,
                         bool tube_mode, int N, const QpSettings& qp)
    : model_(model),
      weights_(weights),
      X_run_(std::move(X_run)),
      U_run_(std::move(U_run)),
      U_sat_(std::move(U_sat)),
      init_offset_(std::move(init_offset)),
      K_(std::move(K)),
      tube_mode_(tube_mode),
      N_(N),
      n_((N + 1) * model.nx + N * model.nu),
      u_off_((N + 1) * model.nx),
      solver_(build_hessian(weights, model.nx, model.nu, N), build_dynamics(model, N),
              SparseMatrix(0, (N + 1) * model.nx + N * model.nu), qp) {
  model_.validate();
  weights_.validate();
  if (N_ < 1) throw InvalidParameterError("TrackingMpc: horizon must be >= 1");
  if (X_run_.dim() != model_.nx || U_run_.dim() != model_.nu)
    throw DimensionError("TrackingMpc: constraint box dimension mismatch");
  if (K_.rows() != model_.nu || K_.cols() != model_.nx)
    throw DimensionError("TrackingMpc: gain must be nu x nx");

  f_.setZero(n_);
  lb_.setZero(n_);
  ub_.setZero(n_);
  beq_.setZero(N_ * model_.nx);
  empty_.resize(0);

  // fixed bounds for stages 1..N and all inputs; stage 0 is set per step
  const int nx = model_.nx, nu = model_.nu;
  for (int k = 1; k <= N_; ++k) {
    lb_.segment(k * nx, nx) = X_run_.lower();
    ub_.segment(k * nx, nx) = X_run_.upper();
  }
  for (int k = 0; k < N_; ++k) {
    lb_.segment(u_off_ + k * nu, nu) = U_run_.lower();
    ub_.segment(u_off_ + k * nu, nu) = U_run_.upper();
  }

  // one-stage shift used to warm start the next solve
  perm_n_.resize(n_);
  for (int k = 0; k <= N_; ++k) {
    int src = std::min(k + 1, N_);
    for (int i = 0; i < nx; ++i) perm_n_[k * nx + i] = src * nx + i;
  }
  for (int k = 0; k < N_; ++k) {
    int src = std::min(k + 1, N_ - 1);
    for (int j = 0; j < nu; ++j) perm_n_[u_off_ + k * nu + j] = u_off_ + src * nu + j;
  }
  const int me = N_ * nx;
  perm_m_.resize(me + n_);
  for (int k = 0; k < N_; ++k) {
    int src = std::min(k + 1, N_ - 1);
    for (int i = 0; i < nx; ++i) perm_m_[k * nx + i] = src * nx + i;
  }
  for (int i = 0; i < n_; ++i) perm_m_[me + i] = me + perm_n_[i];
}

TrackingMpc TrackingMpc::nominal(const LtiModel& model, const CostWeights& weights,
                                 const BoxSet& X, const BoxSet& U, int N, const QpSettings& qp) {
  return TrackingMpc(model, weights, X, U, U, BoxSet::zero(model.nx),
                     Matrix::Zero(model.nu, model.nx), /*tube_mode=*/false, N, qp);
}

TrackingMpc TrackingMpc::robust_tube(const LtiModel& model, const CostWeights& weights,
                                     const BoxSet& X, const BoxSet& U, const TubeApprox& tube,
                                     const Matrix& K, int N, const QpSettings& qp) {
  BoxSet X_bar = tighten_state_box(X, tube.z_box, state_axis_names());
  BoxSet U_bar = tighten_input_box(U, K, tube.z_box, input_axis_names());
  // x_check0 in x - Z, expressed as an offset box around the measurement
  BoxSet init_offset(-tube.z_box.upper(), -tube.z_box.lower());
  return TrackingMpc(model, weights, X_bar, U_bar, U, init_offset, K, /*tube_mode=*/true, N, qp);
}

Matrix state_reference(const ReferenceWindow& window) {
  Matrix refs = Matrix::Zero(kNx, window.pv.cols());
  refs.topRows(6) = window.pv;
  return refs;
}

RtmpcSolution TrackingMpc::step(const Vector& x, const ReferenceWindow& window) {
  return step(x, state_reference(window));
}

RtmpcSolution TrackingMpc::step(const Vector& x, const Matrix& state_refs) {
  const int nx = model_.nx, nu = model_.nu;
  if (x.size() != nx) throw DimensionError("TrackingMpc::step: state dimension mismatch");
  if (state_refs.rows() != nx || state_refs.cols() != N_ + 1)
    throw DimensionError("TrackingMpc::step: reference must be nx x (N+1)");
  if (!x.allFinite()) throw NumericError("TrackingMpc::step: non-finite state");

  auto t0 = std::chrono::steady_clock::now();

  // stage-0 bounds
  if (tube_mode_) {
    BoxSet init_box(x + init_offset_.lower(), x + init_offset_.upper());
    Vector lo0, hi0;
    if (!try_intersect(init_box, X_run_, lo0, hi0))
      throw ExpertInfeasibleError("no nominal initial state: measurement too far outside the tightened constraints");
    lb_.segment(0, nx) = lo0;
    ub_.segment(0, nx) = hi0;
  } else {
    if (!X_run_.contains(x, 1e-9))
      throw ExpertInfeasibleError("measured state violates the state constraints");
    lb_.segment(0, nx) = x;
    ub_.segment(0, nx) = x;
  }

  // linear cost from the reference
  for (int k = 0; k < N_; ++k)
    f_.segment(k * nx, nx).noalias() = -2.0 * (weights_.Q * state_refs.col(k));
  f_.segment(N_ * nx, nx).noalias() = -2.0 * (weights_.P * state_refs.col(N_));
  f_.segment(u_off_, N_ * nu).setZero();

  QpSolution qp = solver_.solve(f_, beq_, lb_, ub_, empty_, empty_,
                                have_warm_ ? &warm_ : nullptr);
  if (qp.status == QpStatus::infeasible)
    throw ExpertInfeasibleError("tracking problem infeasible at the measured state");
  if (qp.status == QpStatus::max_iter) ++max_iter_hits_;

  // shifted warm start for the next call
  warm_.x.resize(n_);
  warm_.z.resize(solver_.rows());
  warm_.y.resize(solver_.rows());
  for (int i = 0; i < n_; ++i) warm_.x[i] = qp.x_opt[perm_n_[i]];
  // recover pre-clamp z/y through the solver's multipliers and x; z rows for
  // the variable box equal the clamped variables themselves
  for (size_t i = 0; i < perm_m_.size(); ++i) {
    int src = perm_m_[i];
    double zval = (src < N_ * nx) ? 0.0 : qp.x_opt[src - N_ * nx];
    warm_.z[static_cast<int>(i)] = zval;
    warm_.y[static_cast<int>(i)] = qp.multipliers[src];
  }
  have_warm_ = true;

  RtmpcSolution sol;
  sol.qp_status = qp.status;
  sol.x_check0 = qp.x_opt.segment(0, nx);
  sol.u_check0 = qp.x_opt.segment(u_off_, nu);
  sol.predicted_states.resize(nx, N_ + 1);
  for (int k = 0; k <= N_; ++k) sol.predicted_states.col(k) = qp.x_opt.segment(k * nx, nx);

  Vector u = sol.u_check0 + K_ * (x - sol.x_check0);
  Vector u_clipped = U_sat_.clamp(u);
  sol.saturated = (u - u_clipped).cwiseAbs().maxCoeff() > 1e-12;
  if (sol.saturated) ++saturation_hits_;
  sol.u_exec = u_clipped;

  sol.solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  solve_ms_.push_back(sol.solve_ms);
  return sol;
}

Vector mpc_step(const LtiModel& model, const CostWeights& weights, const BoxSet& X,
                const BoxSet& U, const Vector& x, const Matrix& state_refs, int N,
                const QpSettings& qp) {
  TrackingMpc mpc = TrackingMpc::nominal(model, weights, X, U, N, qp);
  return mpc.step(x, state_refs).u_exec;
}

RtmpcSolution rtmpc_step(const LtiModel& model, const CostWeights& weights, const BoxSet& X,
                         const BoxSet& U, const TubeApprox& tube, const Matrix& K,
                         const Vector& x, const Matrix& state_refs, int N,
                         const QpSettings& qp) {
  TrackingMpc mpc = TrackingMpc::robust_tube(model, weights, X, U, tube, K, N, qp);
  return mpc.step(x, state_refs);
}

ExpertSetup build_expert_setup(const QuadParams& params, const Vector& q_diag,
                               const Vector& r_diag, double dt, int N, double w_fraction,
                               const TubeOptions& tube_opts, const QpSettings& qp) {
  if (q_diag.size() != kNx || r_diag.size() != kNu)
    throw DimensionError("build_expert_setup: cost diagonal size mismatch");
  ExpertSetup s;
  s.params = params;
  s.dt = dt;
  s.N = N;
  s.qp = qp;
  s.model = linearize_quadrotor_hover(params, dt);
  Matrix Q = q_diag.asDiagonal();
  Matrix R = r_diag.asDiagonal();
  s.lqr = solve_dare(s.model, Q, R);
  s.weights = CostWeights{Q, R, s.lqr.P};
  s.weights.validate();
  s.X = state_constraint_box(params);
  s.U = input_constraint_box(params);
  s.W = state_disturbance_box(params, w_fraction, dt);
  Matrix A_K = s.model.A + s.model.B * s.lqr.K;
  s.tube = estimate_invariant_box(A_K, s.W, tube_opts.rollouts, tube_opts.horizon,
                                  tube_opts.seed, tube_opts.workers);
  return s;
}

TrackingMpc make_expert(const ExpertSetup& s) {
  return TrackingMpc::robust_tube(s.model, s.weights, s.X, s.U, s.tube, s.lqr.K, s.N, s.qp);
}

TrackingMpc make_nominal_mpc(const ExpertSetup& s) {
  return TrackingMpc::nominal(s.model, s.weights, s.X, s.U, s.N, s.qp);
}

Controller expert_controller(TrackingMpc& mpc) {
  return [&mpc](const Vector& x, const ReferenceWindow& window) -> Eigen::Vector3d {
    return mpc.step(x, window).u_exec;
  };
}

}  // namespace rtil
