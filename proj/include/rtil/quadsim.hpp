#pragma once

#include <functional>
#include <string>

#include "rtil/linmodel.hpp"

namespace rtil {

// ---------------------------------------------------------------------------
// Disturbance configuration for an evaluation or collection domain.
//   none                 - unperturbed (source domain)
//   uniform_random       - per-step force uniform in the W box
//   adversarial_constant - per-episode constant force, magnitude drawn from
//                          [adv_lo, adv_hi] * weight, horizontal-dominant
//                          direction (task T1)
//   drag_mismatch        - no external force; the plant runs with drag_eval
//                          instead of the nominal drag coefficient (task T2)
// ---------------------------------------------------------------------------
struct DisturbanceSpec {
  enum class Mode { none, uniform_random, adversarial_constant, drag_mismatch };

  Mode mode = Mode::none;
  double magnitude_fraction = 0.3;  // of vehicle weight
  uint64_t direction_seed = 0;
  double adv_lo = 0.25, adv_hi = 0.30;
  double drag_eval = 0.3;

  void validate() const {
    if (magnitude_fraction < 0.0 || magnitude_fraction > 0.3)
      throw InvalidParameterError("DisturbanceSpec: magnitude_fraction must be in [0, 0.3]");
    if (adv_lo < 0.0 || adv_hi > 0.3 || adv_lo > adv_hi)
      throw InvalidParameterError("DisturbanceSpec: adversarial range must lie in [0, 0.3]");
    if (drag_eval < 0.0) throw InvalidParameterError("DisturbanceSpec: drag_eval must be >= 0");
  }
};

// Disturbance set W in the coordinates of the discrete model: a force box of
// fraction*weight enters the velocity states scaled by dt/mass.
BoxSet state_disturbance_box(const QuadParams& params, double fraction, double dt);

// ---------------------------------------------------------------------------
// Reference trajectories: stacked desired positions and velocities.
// ---------------------------------------------------------------------------
struct ReferenceWindow {
  Matrix pv;  // 6 x (N+1)
  int horizon() const { return static_cast<int>(pv.cols()) - 1; }
};

struct ReferenceTrajectory {
  Matrix pv;  // 6 x (steps+1)
  double dt = 0.1;

  int steps() const { return static_cast<int>(pv.cols()) - 1; }

  // Sliding window; the final point is held past the end of the trajectory.
  ReferenceWindow window(int t, int N) const {
    ReferenceWindow w;
    w.pv.resize(6, N + 1);
    int last = static_cast<int>(pv.cols()) - 1;
    for (int k = 0; k <= N; ++k) w.pv.col(k) = pv.col(std::min(t + k, last));
    return w;
  }
};

enum class ReferenceKind { lemniscate, circle, step };

struct RefParams {
  double radius = 1.5;                  // m
  double speed = 1.5;                   // m/s (peak for the lemniscate)
  Eigen::Vector3d center{0.0, 0.0, 2.0};
};

// Analytic references; velocities are exact derivatives of the positions.
ReferenceTrajectory make_reference(ReferenceKind kind, const RefParams& params,
                                   double duration, double dt, double velocity_limit = 4.0);

ReferenceKind reference_kind_from_string(const std::string& s);
const char* to_string(ReferenceKind k);

// ---------------------------------------------------------------------------
// Nonlinear point-mass plant with first-order tilt dynamics.
// State [px,py,pz,vx,vy,vz,roll,pitch]; action is hover-relative
// [thrust(N), roll_cmd, pitch_cmd] and is saturated to the actuation limits
// before integration. w_force is an external force in N.
// ---------------------------------------------------------------------------
Vector quad_derivative(const Vector& x, double thrust_total, double roll_cmd, double pitch_cmd,
                       const Eigen::Vector3d& w_force, const QuadParams& params);

Vector quad_step(const Vector& x, const Eigen::Vector3d& action_delta,
                 const Eigen::Vector3d& w_force, const QuadParams& params, double dt);

// ---------------------------------------------------------------------------
// Episode rollouts.
// ---------------------------------------------------------------------------
using Controller = std::function<Eigen::Vector3d(const Vector&, const ReferenceWindow&)>;

struct Episode {
  Matrix states;      // nx x (steps+1)
  Matrix actions;     // nu x steps, hover-relative
  Matrix refs;        // 6 x steps, reference point tracked at each step
  Matrix forces;      // 3 x steps, applied external force
  Vector step_costs;  // tracking stage cost per step
  double dt = 0.1;
  int steps = 0;
  bool violated = false;
  bool expert_infeasible = false;

  bool success() const { return !violated && !expert_infeasible; }
  double total_stage_cost() const { return step_costs.head(steps).sum(); }
};

struct RolloutSpec {
  QuadParams params;
  DisturbanceSpec dist;
  BoxSet X;        // state constraints checked for the success flag
  Matrix Q, R;     // stage-cost weights
  int N = 20;      // reference window horizon handed to the controller
  double init_pos_noise = 0.15;
  double init_vel_noise = 0.10;
  double init_tilt_noise = 0.02;
};

Episode rollout(const Controller& controller, const ReferenceTrajectory& ref,
                const RolloutSpec& spec, uint64_t seed);

void write_episode_csv(const Episode& ep, const std::string& path);

}  // namespace rtil
