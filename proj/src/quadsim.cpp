#include "rtil/quadsim.hpp"

#include <cmath>
#include <fstream>

namespace rtil {

BoxSet state_disturbance_box(const QuadParams& params, double fraction, double dt) {
  params.validate();
  if (fraction < 0.0 || fraction > 0.3)
    throw InvalidParameterError("state_disturbance_box: fraction must be in [0, 0.3]");
  Vector half = Vector::Zero(kNx);
  // force f enters velocity as dt * f / m; |f| <= fraction * m * g
  half.segment<3>(3).setConstant(dt * fraction * params.gravity);
  return BoxSet::symmetric(half);
}

ReferenceKind reference_kind_from_string(const std::string& s) {
  if (s == "lemniscate" || s == "eight") return ReferenceKind::lemniscate;
  if (s == "circle") return ReferenceKind::circle;
  if (s == "step") return ReferenceKind::step;
  throw InvalidParameterError("unknown reference kind: " + s);
}

const char* to_string(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::lemniscate: return "lemniscate";
    case ReferenceKind::circle: return "circle";
    case ReferenceKind::step: return "step";
  }
  return "unknown";
}

ReferenceTrajectory make_reference(ReferenceKind kind, const RefParams& params, double duration,
                                   double dt, double velocity_limit) {
  if (!(dt > 0.0) || !(duration > 0.0))
    throw InvalidParameterError("make_reference: duration and dt must be positive");
  double steps_real = duration / dt;
  int T = static_cast<int>(std::lround(steps_real));
  if (std::abs(steps_real - T) > 1e-9 || T < 1)
    throw InvalidParameterError("make_reference: duration must be an integer multiple of dt");
  if (!(params.radius > 0.0) || params.radius > 4.0)
    throw InvalidParameterError("make_reference: radius out of bounds (0, 4]");
  if (kind != ReferenceKind::step &&
      (!(params.speed > 0.0) || params.speed > velocity_limit))
    throw InvalidParameterError("make_reference: speed out of bounds (0, velocity_limit]");

  ReferenceTrajectory traj;
  traj.dt = dt;
  traj.pv.resize(6, T + 1);

  const double r = params.radius;
  switch (kind) {
    case ReferenceKind::lemniscate: {
      // figure-eight of Gerono through the center: p = (r sin s, r/2 sin 2s);
      // |dp/ds| peaks at sqrt(2) r (s = 0), so a constant parameter rate of
      // speed / (sqrt(2) r) realizes the requested peak speed
      const double s_rate = params.speed / (std::sqrt(2.0) * r);
      for (int k = 0; k <= T; ++k) {
        double s = s_rate * k * dt;
        traj.pv(0, k) = params.center[0] + r * std::sin(s);
        traj.pv(1, k) = params.center[1] + 0.5 * r * std::sin(2.0 * s);
        traj.pv(2, k) = params.center[2];
        traj.pv(3, k) = s_rate * r * std::cos(s);
        traj.pv(4, k) = s_rate * r * std::cos(2.0 * s);
        traj.pv(5, k) = 0.0;
      }
      break;
    }
    case ReferenceKind::circle: {
      const double omega = params.speed / r;
      for (int k = 0; k <= T; ++k) {
        double s = omega * k * dt;
        traj.pv(0, k) = params.center[0] + r * std::cos(s);
        traj.pv(1, k) = params.center[1] + r * std::sin(s);
        traj.pv(2, k) = params.center[2];
        traj.pv(3, k) = -r * omega * std::sin(s);
        traj.pv(4, k) = r * omega * std::cos(s);
        traj.pv(5, k) = 0.0;
      }
      break;
    }
    case ReferenceKind::step: {
      // hold the center at t=0, then a lateral offset of one radius
      for (int k = 0; k <= T; ++k) {
        traj.pv.col(k).setZero();
        traj.pv(0, k) = params.center[0] + (k == 0 ? 0.0 : r);
        traj.pv(1, k) = params.center[1];
        traj.pv(2, k) = params.center[2];
      }
      break;
    }
  }
  return traj;
}

Vector quad_derivative(const Vector& x, double thrust_total, double roll_cmd, double pitch_cmd,
                       const Eigen::Vector3d& w_force, const QuadParams& p) {
  Vector dx(kNx);
  const double roll = x[6], pitch = x[7];
  const double acc = thrust_total / p.mass;
  // body z-axis in the world frame at zero yaw
  const double ax = acc * std::sin(pitch) * std::cos(roll);
  const double ay = -acc * std::sin(roll);
  const double az = acc * std::cos(pitch) * std::cos(roll);
  dx.segment<3>(0) = x.segment<3>(3);
  dx[3] = ax - p.drag_coeff * x[3] + w_force[0] / p.mass;
  dx[4] = ay - p.drag_coeff * x[4] + w_force[1] / p.mass;
  dx[5] = az - p.gravity - p.drag_coeff * x[5] + w_force[2] / p.mass;
  dx[6] = (roll_cmd - roll) / p.tilt_tau;
  dx[7] = (pitch_cmd - pitch) / p.tilt_tau;
  return dx;
}

Vector quad_step(const Vector& x, const Eigen::Vector3d& action_delta,
                 const Eigen::Vector3d& w_force, const QuadParams& p, double dt) {
  if (x.size() != kNx) throw DimensionError("quad_step: state must be 8-dimensional");
  if (!x.allFinite() || !action_delta.allFinite() || !w_force.allFinite())
    throw NumericError("quad_step: non-finite input");

  // saturate before integration
  const double thrust = std::clamp(p.hover_thrust() + action_delta[0],
                                   p.mass * p.thrust_min, p.mass * p.thrust_max);
  const double roll_cmd = std::clamp(action_delta[1], -p.tilt_cmd_limit, p.tilt_cmd_limit);
  const double pitch_cmd = std::clamp(action_delta[2], -p.tilt_cmd_limit, p.tilt_cmd_limit);

  auto f = [&](const Vector& s) { return quad_derivative(s, thrust, roll_cmd, pitch_cmd, w_force, p); };
  Vector k1 = f(x);
  Vector k2 = f(x + 0.5 * dt * k1);
  Vector k3 = f(x + 0.5 * dt * k2);
  Vector k4 = f(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

Eigen::Vector3d draw_adversarial_force(const DisturbanceSpec& d, const QuadParams& p, Rng& rng) {
  const double weight = p.mass * p.gravity;
  const double mag = rng.uniform(d.adv_lo, d.adv_hi) * weight;
  const double azimuth = rng.uniform(0.0, 2.0 * M_PI);
  // horizontal-dominant: elevation within +-30 degrees
  const double elevation = rng.uniform(-M_PI / 6.0, M_PI / 6.0);
  Eigen::Vector3d dir(std::cos(elevation) * std::cos(azimuth),
                      std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
  return mag * dir;
}

}  // namespace

Episode rollout(const Controller& controller, const ReferenceTrajectory& ref,
                const RolloutSpec& spec, uint64_t seed) {
  spec.params.validate();
  spec.dist.validate();
  const int T = ref.steps();
  const int nx = kNx, nu = kNu;

  QuadParams plant = spec.params;
  if (spec.dist.mode == DisturbanceSpec::Mode::drag_mismatch) plant.drag_coeff = spec.dist.drag_eval;

  Rng rng(seed);
  Rng init_rng = rng.child(0);
  Rng dist_rng = rng.child(1 + spec.dist.direction_seed);

  Episode ep;
  ep.dt = ref.dt;
  ep.states.setZero(nx, T + 1);
  ep.actions.setZero(nu, T);
  ep.refs.setZero(6, T);
  ep.forces.setZero(3, T);
  ep.step_costs.setZero(T);

  Vector x(nx);
  for (int i = 0; i < 3; ++i)
    x[i] = ref.pv(i, 0) + init_rng.uniform(-spec.init_pos_noise, spec.init_pos_noise);
  for (int i = 0; i < 3; ++i)
    x[3 + i] = ref.pv(3 + i, 0) + init_rng.uniform(-spec.init_vel_noise, spec.init_vel_noise);
  for (int i = 0; i < 2; ++i)
    x[6 + i] = init_rng.uniform(-spec.init_tilt_noise, spec.init_tilt_noise);
  ep.states.col(0) = x;

  Eigen::Vector3d adv_force = Eigen::Vector3d::Zero();
  if (spec.dist.mode == DisturbanceSpec::Mode::adversarial_constant)
    adv_force = draw_adversarial_force(spec.dist, spec.params, dist_rng);

  const double force_half = spec.dist.magnitude_fraction * spec.params.mass * spec.params.gravity;
  if (!spec.X.contains(x, 1e-9)) ep.violated = true;

  for (int t = 0; t < T; ++t) {
    ReferenceWindow window = ref.window(t, spec.N);

    Eigen::Vector3d u;
    try {
      u = controller(x, window);
    } catch (const ExpertInfeasibleError&) {
      ep.expert_infeasible = true;
      ep.violated = true;
      break;
    }

    Eigen::Vector3d w = Eigen::Vector3d::Zero();
    switch (spec.dist.mode) {
      case DisturbanceSpec::Mode::uniform_random:
        for (int i = 0; i < 3; ++i) w[i] = dist_rng.uniform(-force_half, force_half);
        break;
      case DisturbanceSpec::Mode::adversarial_constant:
        w = adv_force;
        break;
      default:
        break;
    }

    ep.actions.col(t) = u;
    ep.refs.col(t) = window.pv.col(0);
    ep.forces.col(t) = w;

    Vector e(nx);
    e.segment<6>(0) = x.segment<6>(0) - window.pv.col(0);
    e.segment<2>(6) = x.segment<2>(6);
    ep.step_costs[t] = e.dot(spec.Q * e) + u.dot(spec.R * u);

    x = quad_step(x, u, w, plant, ref.dt);
    ep.states.col(t + 1) = x;
    ep.steps = t + 1;

    if (!spec.X.contains(x, 1e-9)) ep.violated = true;
    if (x.segment<3>(0).cwiseAbs().maxCoeff() > 1e3 ||
        x.segment<3>(3).cwiseAbs().maxCoeff() > 1e3) {
      ep.violated = true;  // diverged; no point integrating further
      break;
    }
  }
  return ep;
}

void write_episode_csv(const Episode& ep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "t";
  for (const auto& n : state_axis_names()) out << "," << n;
  for (const auto& n : input_axis_names()) out << ",u_" << n;
  out << ",ref_px,ref_py,ref_pz,ref_vx,ref_vy,ref_vz,wx,wy,wz,stage_cost\n";
  out.precision(17);
  for (int t = 0; t < ep.steps; ++t) {
    out << t * ep.dt;
    for (int i = 0; i < ep.states.rows(); ++i) out << "," << ep.states(i, t);
    for (int i = 0; i < ep.actions.rows(); ++i) out << "," << ep.actions(i, t);
    for (int i = 0; i < 6; ++i) out << "," << ep.refs(i, t);
    for (int i = 0; i < 3; ++i) out << "," << ep.forces(i, t);
    out << "," << ep.step_costs[t] << "\n";
  }
}

}  // namespace rtil
