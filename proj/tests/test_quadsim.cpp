#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "rtil/quadsim.hpp"

using namespace rtil;

TEST_CASE("hover is an equilibrium of the integrator") {
  QuadParams p;
  Vector x = Vector::Zero(8);
  x[2] = 2.0;
  Vector next = quad_step(x, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), p, 0.1);
  CHECK((next - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("free fall matches the closed form") {
  QuadParams p;
  p.drag_coeff = 0.0;
  p.thrust_min = 0.0;  // allow cutting thrust entirely
  Vector x = Vector::Zero(8);
  x[2] = 3.0;
  Eigen::Vector3d cut(-p.hover_thrust(), 0.0, 0.0);
  Vector next = quad_step(x, cut, Eigen::Vector3d::Zero(), p, 0.1);
  CHECK(next[5] == doctest::Approx(-9.81 * 0.1).epsilon(1e-12));
}

TEST_CASE("constant upward force balances as expected") {
  QuadParams p;
  p.drag_coeff = 0.0;
  Vector x = Vector::Zero(8);
  x[2] = 2.0;
  Eigen::Vector3d w(0.0, 0.0, 0.3 * p.mass * p.gravity);
  Vector next = quad_step(x, Eigen::Vector3d::Zero(), w, p, 0.1);
  CHECK(next[5] == doctest::Approx(0.3 * 9.81 * 0.1).epsilon(1e-12));
}

TEST_CASE("inputs are saturated before integration") {
  QuadParams p;
  Vector x = Vector::Zero(8);
  x[2] = 2.0;
  Eigen::Vector3d wild(100.0, 3.0, -3.0);
  Vector next = quad_step(x, wild, Eigen::Vector3d::Zero(), p, 0.1);
  // vertical acceleration capped at thrust_max - g = 0.7 g
  CHECK(next[5] <= 0.7 * 9.81 * 0.1 + 1e-9);
  CHECK(next[6] <= p.tilt_cmd_limit);
  CHECK(quad_step(x, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), p, 0.1).allFinite());
  Vector bad = x;
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(quad_step(bad, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), p, 0.1),
                  NumericError);
}

TEST_CASE("step reference holds the target after t = 0") {
  RefParams rp;
  rp.radius = 1.0;
  ReferenceTrajectory traj = make_reference(ReferenceKind::step, rp, 2.0, 0.1);
  CHECK(traj.steps() == 20);
  CHECK(traj.pv(0, 0) == doctest::Approx(rp.center[0]));
  for (int k = 1; k <= 20; ++k) {
    CHECK(traj.pv(0, k) == doctest::Approx(rp.center[0] + 1.0));
    CHECK(traj.pv.col(k).tail(3).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("circle keeps a constant speed") {
  RefParams rp;
  rp.radius = 1.2;
  rp.speed = 1.6;
  ReferenceTrajectory traj = make_reference(ReferenceKind::circle, rp, 5.0, 0.1);
  for (int k = 0; k <= traj.steps(); ++k)
    CHECK(traj.pv.col(k).segment<3>(3).norm() == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("lemniscate velocities are consistent with its positions") {
  RefParams rp;
  rp.radius = 1.5;
  rp.speed = 1.5;
  const double dt = 1e-3;
  ReferenceTrajectory traj = make_reference(ReferenceKind::lemniscate, rp, 1.0, dt);
  double peak = 0.0;
  for (int k = 0; k <= traj.steps(); ++k)
    peak = std::max(peak, traj.pv.col(k).segment<3>(3).norm());
  CHECK(peak == doctest::Approx(1.5).epsilon(1e-3));
  for (int k = 1; k < traj.steps(); ++k) {
    Eigen::Vector3d fd = (traj.pv.col(k + 1).head<3>() - traj.pv.col(k - 1).head<3>()) / (2.0 * dt);
    CHECK((fd - traj.pv.col(k).segment<3>(3)).cwiseAbs().maxCoeff() < 1e-6 * 1.5);
  }
}

TEST_CASE("reference parameter validation") {
  RefParams rp;
  rp.speed = 9.0;
  CHECK_THROWS_AS(make_reference(ReferenceKind::circle, rp, 5.0, 0.1, 4.0),
                  InvalidParameterError);
  rp.speed = 1.0;
  CHECK_THROWS_AS(make_reference(ReferenceKind::circle, rp, 1.05, 0.1), InvalidParameterError);
  rp.radius = -1.0;
  CHECK_THROWS_AS(make_reference(ReferenceKind::circle, rp, 1.0, 0.1), InvalidParameterError);
}

TEST_CASE("reference window holds the final point past the end") {
  RefParams rp;
  ReferenceTrajectory traj = make_reference(ReferenceKind::circle, rp, 1.0, 0.1);
  ReferenceWindow w = traj.window(8, 5);
  CHECK(w.pv.cols() == 6);
  CHECK((w.pv.col(2) - traj.pv.col(10)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((w.pv.col(5) - traj.pv.col(10)).cwiseAbs().maxCoeff() == 0.0);  // held
}

TEST_CASE("uncontrolled rollout violates the flight box") {
  RunConfig cfg = rtil::testing::desk_config();
  RolloutSpec spec;
  spec.params = cfg.params;
  spec.X = state_constraint_box(cfg.params);
  spec.Q = cfg.q_diag.asDiagonal();
  spec.R = cfg.r_diag.asDiagonal();
  spec.N = 10;
  Controller cut = [&](const Vector&, const ReferenceWindow&) {
    return Eigen::Vector3d(-cfg.params.hover_thrust(), 0.0, 0.0);
  };
  ReferenceTrajectory traj = make_reference(ReferenceKind::step, RefParams{}, 7.0, 0.1);
  Episode ep = rollout(cut, traj, spec, 5);
  CHECK(ep.violated);
  CHECK(!ep.success());
}

TEST_CASE("rollouts are deterministic in the seed") {
  RunConfig cfg = rtil::testing::desk_config();
  RolloutSpec spec;
  spec.params = cfg.params;
  spec.X = state_constraint_box(cfg.params);
  spec.Q = cfg.q_diag.asDiagonal();
  spec.R = cfg.r_diag.asDiagonal();
  spec.N = 10;
  spec.dist.mode = DisturbanceSpec::Mode::uniform_random;
  Controller hold = [](const Vector&, const ReferenceWindow&) {
    return Eigen::Vector3d::Zero();
  };
  ReferenceTrajectory traj = make_reference(ReferenceKind::lemniscate, RefParams{}, 3.0, 0.1);
  Episode a = rollout(hold, traj, spec, 42);
  Episode b = rollout(hold, traj, spec, 42);
  CHECK((a.states - b.states).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.forces - b.forces).cwiseAbs().maxCoeff() == 0.0);
  Episode c = rollout(hold, traj, spec, 43);
  CHECK((a.forces - c.forces).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("disturbance draws respect the weight-fraction bound") {
  RunConfig cfg = rtil::testing::desk_config();
  const double bound = 0.3 * cfg.params.mass * cfg.params.gravity;
  RolloutSpec spec;
  spec.params = cfg.params;
  spec.X = state_constraint_box(cfg.params);
  spec.Q = cfg.q_diag.asDiagonal();
  spec.R = cfg.r_diag.asDiagonal();
  spec.N = 10;
  Controller hold = [](const Vector&, const ReferenceWindow&) {
    return Eigen::Vector3d::Zero();
  };
  ReferenceTrajectory traj = make_reference(ReferenceKind::step, RefParams{}, 3.0, 0.1);

  spec.dist.mode = DisturbanceSpec::Mode::uniform_random;
  for (int seed = 0; seed < 5; ++seed) {
    Episode ep = rollout(hold, traj, spec, seed);
    CHECK(ep.forces.cwiseAbs().maxCoeff() <= bound + 1e-12);
  }
  spec.dist.mode = DisturbanceSpec::Mode::adversarial_constant;
  for (int seed = 0; seed < 5; ++seed) {
    Episode ep = rollout(hold, traj, spec, seed);
    CHECK(ep.forces.cwiseAbs().maxCoeff() <= bound + 1e-12);
    double mag = ep.forces.col(0).norm();
    CHECK(mag >= 0.25 * bound / 0.3 - 1e-9);
    CHECK(mag <= bound + 1e-9);
    // constant across the episode
    for (int t = 1; t < ep.steps; ++t)
      CHECK((ep.forces.col(t) - ep.forces.col(0)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("disturbance spec validation") {
  DisturbanceSpec d;
  d.magnitude_fraction = 0.5;
  CHECK_THROWS_AS(d.validate(), InvalidParameterError);
  d.magnitude_fraction = 0.3;
  d.adv_hi = 0.35;
  CHECK_THROWS_AS(d.validate(), InvalidParameterError);
}

TEST_CASE("state disturbance box scales force into velocity increments") {
  QuadParams p;
  BoxSet W = state_disturbance_box(p, 0.3, 0.1);
  CHECK(W.dim() == 8);
  CHECK(W.upper()[3] == doctest::Approx(0.1 * 0.3 * 9.81));
  CHECK(W.upper()[0] == 0.0);
  CHECK(W.upper()[6] == 0.0);
  CHECK_THROWS_AS(state_disturbance_box(p, 0.4, 0.1), InvalidParameterError);
}
