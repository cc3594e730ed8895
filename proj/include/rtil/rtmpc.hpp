#pragma once

#include <vector>

#include "rtil/linmodel.hpp"
#include "rtil/qp.hpp"
#include "rtil/quadsim.hpp"
#include "rtil/riccati.hpp"
#include "rtil/tube.hpp"

namespace rtil {

// Per-step output of the tube controller.
struct RtmpcSolution {
  Vector x_check0;          // optimal nominal initial state
  Vector u_check0;          // feedforward action
  Vector u_exec;            // executed action after the ancillary correction
  Matrix predicted_states;  // nx x (N+1) nominal prediction
  QpStatus qp_status = QpStatus::solved;
  bool saturated = false;   // u_exec was clipped to the input box
  double solve_ms = 0.0;
};

// Receding-horizon tracking controller in stacked form: the decision vector
// is all predicted states followed by all inputs, dynamics enter as equality
// constraints, and all other constraints are variable bounds. The nominal
// variant pins the first state to the measurement; the robust tube variant
// lets it move inside x_t - Z and wraps the plan with u = u0* + K (x - x0*).
class TrackingMpc {
 public:
  static TrackingMpc nominal(const LtiModel& model, const CostWeights& weights, const BoxSet& X,
                             const BoxSet& U, int N, const QpSettings& qp = QpSettings{});

  // Tightens X by Z and U by KZ at construction; throws
  // InfeasibleTighteningError when the tube is wider than a constraint.
  static TrackingMpc robust_tube(const LtiModel& model, const CostWeights& weights,
                                 const BoxSet& X, const BoxSet& U, const TubeApprox& tube,
                                 const Matrix& K, int N, const QpSettings& qp = QpSettings{});

  // state_refs is nx x (N+1); throws ExpertInfeasibleError when no feasible
  // plan exists at x.
  RtmpcSolution step(const Vector& x, const Matrix& state_refs);
  RtmpcSolution step(const Vector& x, const ReferenceWindow& window);

  void reset_warm() { have_warm_ = false; }

  int horizon() const { return N_; }
  bool tube_mode() const { return tube_mode_; }
  const Matrix& gain() const { return K_; }
  const BoxSet& run_state_box() const { return X_run_; }
  const BoxSet& run_input_box() const { return U_run_; }
  const std::vector<double>& solve_times_ms() const { return solve_ms_; }
  void clear_solve_times() { solve_ms_.clear(); }
  long max_iter_hits() const { return max_iter_hits_; }
  long saturation_hits() const { return saturation_hits_; }

 private:
  TrackingMpc(const LtiModel& model, const CostWeights& weights, BoxSet X_run, BoxSet U_run,
              BoxSet U_sat, BoxSet init_offset, Matrix K, bool tube_mode, int N,
              const QpSettings& qp);

  LtiModel model_;
  CostWeights weights_;
  BoxSet X_run_, U_run_;   // boxes applied to predicted states / inputs
  BoxSet U_sat_;           // saturation box for the executed action
  BoxSet init_offset_;     // x_check0 must lie in x + init_offset_
  Matrix K_;
  bool tube_mode_;
  int N_, n_, u_off_;
  AdmmQp solver_;
  Vector f_, lb_, ub_, beq_, empty_;
  QpWarmStart warm_;
  bool have_warm_ = false;
  std::vector<int> perm_n_, perm_m_;  // one-stage shift for warm starts
  std::vector<double> solve_ms_;
  long max_iter_hits_ = 0;
  long saturation_hits_ = 0;
};

// Quadrotor adapter: position/velocity targets with zero tilt reference.
Matrix state_reference(const ReferenceWindow& window);

// One-shot forms used by tests; construct a controller per call.
Vector mpc_step(const LtiModel& model, const CostWeights& weights, const BoxSet& X,
                const BoxSet& U, const Vector& x, const Matrix& state_refs, int N,
                const QpSettings& qp = QpSettings{});

RtmpcSolution rtmpc_step(const LtiModel& model, const CostWeights& weights, const BoxSet& X,
                         const BoxSet& U, const TubeApprox& tube, const Matrix& K,
                         const Vector& x, const Matrix& state_refs, int N,
                         const QpSettings& qp = QpSettings{});

// ---------------------------------------------------------------------------
// Everything needed to instantiate the expert on the quadrotor.
// ---------------------------------------------------------------------------
struct ExpertSetup {
  QuadParams params;
  LtiModel model;
  CostWeights weights;
  LqrSolution lqr;
  BoxSet X, U, W;
  TubeApprox tube;
  int N = 20;
  double dt = 0.1;
  QpSettings qp;
};

struct TubeOptions {
  long rollouts = 10000;
  int horizon = 300;
  uint64_t seed = 99;
  int workers = 1;
};

ExpertSetup build_expert_setup(const QuadParams& params, const Vector& q_diag,
                               const Vector& r_diag, double dt, int N, double w_fraction,
                               const TubeOptions& tube_opts = TubeOptions{},
                               const QpSettings& qp = QpSettings{});

TrackingMpc make_expert(const ExpertSetup& setup);
TrackingMpc make_nominal_mpc(const ExpertSetup& setup);

// Wraps a controller for quadsim rollouts; the controller must outlive the
// returned callable.
Controller expert_controller(TrackingMpc& mpc);

}  // namespace rtil
