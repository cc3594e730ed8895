#include "rtil/linmodel.hpp"

#include <Eigen/Cholesky>

namespace rtil {

void CostWeights::validate() const {
  auto check_spd = [](const Matrix& m, const char* name) {
    if (m.rows() != m.cols()) throw DimensionError(std::string(name) + " must be square");
    if (!m.isApprox(m.transpose(), 1e-10))
      throw InvalidParameterError(std::string(name) + " must be symmetric");
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success)
      throw InvalidParameterError(std::string(name) + " must be positive definite");
  };
  check_spd(Q, "Q");
  check_spd(R, "R");
  check_spd(P, "P");
}

bool try_intersect(const BoxSet& a, const BoxSet& b, Vector& lo_out, Vector& hi_out) {
  if (a.dim() != b.dim()) throw DimensionError("try_intersect: dimension mismatch");
  lo_out = a.lower().cwiseMax(b.lower());
  hi_out = a.upper().cwiseMin(b.upper());
  for (int i = 0; i < lo_out.size(); ++i)
    if (lo_out[i] > hi_out[i]) return false;
  return true;
}

const std::vector<std::string>& state_axis_names() {
  static const std::vector<std::string> names = {"px", "py", "pz", "vx",
                                                 "vy", "vz", "roll", "pitch"};
  return names;
}

const std::vector<std::string>& input_axis_names() {
  static const std::vector<std::string> names = {"thrust", "roll_cmd", "pitch_cmd"};
  return names;
}

LtiModel linearize_quadrotor_hover(const QuadParams& params, double dt) {
  params.validate();
  if (!(dt > 0.0)) throw InvalidParameterError("linearize_quadrotor_hover: dt must be positive");

  const double g = params.gravity;
  const double m = params.mass;
  const double cd = params.drag_coeff;
  const double tau = params.tilt_tau;

  Matrix Ac = Matrix::Zero(kNx, kNx);
  // position integrates velocity
  Ac(0, 3) = 1.0;
  Ac(1, 4) = 1.0;
  Ac(2, 5) = 1.0;
  // velocity: drag plus small-angle tilt coupling (pitch -> +ax, roll -> -ay)
  Ac(3, 3) = -cd;
  Ac(3, 7) = g;
  Ac(4, 4) = -cd;
  Ac(4, 6) = -g;
  Ac(5, 5) = -cd;
  // tilt follows commanded tilt with a first-order lag
  Ac(6, 6) = -1.0 / tau;
  Ac(7, 7) = -1.0 / tau;

  Matrix Bc = Matrix::Zero(kNx, kNu);
  Bc(5, 0) = 1.0 / m;  // thrust (N, hover-relative) -> vertical acceleration
  Bc(6, 1) = 1.0 / tau;
  Bc(7, 2) = 1.0 / tau;

  LtiModel model;
  model.A = Matrix::Identity(kNx, kNx) + dt * Ac;
  model.B = dt * Bc;
  model.nx = kNx;
  model.nu = kNu;
  model.dt = dt;
  model.validate();
  return model;
}

BoxSet state_constraint_box(const QuadParams& params) {
  params.validate();
  Vector lo(kNx), hi(kNx);
  lo.segment<3>(0) = params.flight_lower;
  hi.segment<3>(0) = params.flight_upper;
  lo.segment<3>(3).setConstant(-params.velocity_limit);
  hi.segment<3>(3).setConstant(params.velocity_limit);
  lo.segment<2>(6).setConstant(-params.tilt_limit);
  hi.segment<2>(6).setConstant(params.tilt_limit);
  return BoxSet(lo, hi);
}

BoxSet input_constraint_box(const QuadParams& params) {
  params.validate();
  Vector lo(kNu), hi(kNu);
  lo[0] = params.mass * (params.thrust_min - params.gravity);
  hi[0] = params.mass * (params.thrust_max - params.gravity);
  lo[1] = -params.tilt_cmd_limit;
  hi[1] = params.tilt_cmd_limit;
  lo[2] = -params.tilt_cmd_limit;
  hi[2] = params.tilt_cmd_limit;
  return BoxSet(lo, hi);
}

namespace {

std::string axis_label(int i, const std::vector<std::string>& names) {
  if (i < static_cast<int>(names.size())) return std::to_string(i) + " (" + names[i] + ")";
  return std::to_string(i);
}

}  // namespace

BoxSet tighten_state_box(const BoxSet& X, const BoxSet& Z,
                         const std::vector<std::string>& axis_names) {
  if (X.dim() != Z.dim()) throw DimensionError("tighten_state_box: dimension mismatch");
  Vector lo = X.lower() - Z.lower();
  Vector hi = X.upper() - Z.upper();
  for (int i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i])
      throw InfeasibleTighteningError("state tightening empty on axis " +
                                      axis_label(i, axis_names) +
                                      " (tube wider than constraint)");
  }
  return BoxSet(lo, hi);
}

BoxSet tighten_input_box(const BoxSet& U, const Matrix& K, const BoxSet& Z,
                         const std::vector<std::string>& axis_names) {
  if (K.rows() != U.dim() || K.cols() != Z.dim())
    throw DimensionError("tighten_input_box: K must be dim(U) x dim(Z)");
  Vector zmax = Z.abs_bound();
  Vector lo = U.lower();
  Vector hi = U.upper();
  for (int j = 0; j < U.dim(); ++j) {
    double bound = K.row(j).cwiseAbs().dot(zmax);
    lo[j] += bound;
    hi[j] -= bound;
    if (lo[j] > hi[j])
      throw InfeasibleTighteningError("input tightening empty on axis " +
                                      axis_label(j, axis_names) +
                                      " (feedback action exceeds input range)");
  }
  return BoxSet(lo, hi);
}

}  // namespace rtil
