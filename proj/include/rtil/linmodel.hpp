#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rtil/common.hpp"

namespace rtil {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// BoxSet: axis-aligned interval set used for state, input and disturbance
// constraints and for the tube outer approximation. An empty box is not
// representable; construction throws instead.
// ---------------------------------------------------------------------------
class BoxSet {
 public:
  BoxSet() = default;  // dimension-0 placeholder

  BoxSet(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size())
      throw DimensionError("BoxSet: lower/upper dimension mismatch");
    for (int i = 0; i < lower_.size(); ++i) {
      if (!(lower_[i] <= upper_[i]))
        throw InvalidParameterError("BoxSet: empty interval on axis " + std::to_string(i));
    }
  }

  static BoxSet zero(int dim) { return BoxSet(Vector::Zero(dim), Vector::Zero(dim)); }

  // [-h, h] per axis
  static BoxSet symmetric(const Vector& halfwidth) { return BoxSet(-halfwidth, halfwidth); }

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  bool contains(const Vector& x, double tol = 0.0) const {
    if (x.size() != lower_.size()) throw DimensionError("BoxSet::contains: dimension mismatch");
    for (int i = 0; i < x.size(); ++i) {
      if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
    }
    return true;
  }

  Vector clamp(const Vector& x) const {
    return x.cwiseMax(lower_).cwiseMin(upper_);
  }

  // Largest absolute coordinate per axis.
  Vector abs_bound() const { return lower_.cwiseAbs().cwiseMax(upper_.cwiseAbs()); }

  bool is_zero() const { return lower_.isZero(0.0) && upper_.isZero(0.0); }

  BoxSet scaled(double factor) const { return BoxSet(factor * lower_, factor * upper_); }

 private:
  Vector lower_, upper_;
};

// Intersection can be empty, so it does not return a BoxSet directly.
bool try_intersect(const BoxSet& a, const BoxSet& b, Vector& lo_out, Vector& hi_out);

// ---------------------------------------------------------------------------
// Nominal discrete-time linear model x+ = A x + B u (+ w).
// ---------------------------------------------------------------------------
struct LtiModel {
  Matrix A;
  Matrix B;
  int nx = 0;
  int nu = 0;
  double dt = 0.0;

  void validate() const {
    if (nx < 1 || nu < 1) throw InvalidParameterError("LtiModel: nx and nu must be >= 1");
    if (A.rows() != nx || A.cols() != nx) throw DimensionError("LtiModel: A must be nx x nx");
    if (B.rows() != nx || B.cols() != nu) throw DimensionError("LtiModel: B must be nx x nu");
    if (!(dt > 0.0)) throw InvalidParameterError("LtiModel: dt must be positive");
  }
};

// Stage/terminal cost weights. All three must be symmetric positive definite.
struct CostWeights {
  Matrix Q;
  Matrix R;
  Matrix P;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Quadrotor parameters shared by the nonlinear simulator and the hover
// linearization. Thrust limits are mass-normalized (m/s^2); tilt commands are
// bounded by tilt_limit (rad). The flight-space box constrains position.
// ---------------------------------------------------------------------------
struct QuadParams {
  double mass = 1.0;          // kg
  double gravity = 9.81;      // m/s^2
  double tilt_tau = 0.15;     // s, first-order lag toward commanded tilt
  double drag_coeff = 0.1;    // 1/s, per-axis linear drag
  double tilt_limit = 0.5;      // rad, state constraint
  double tilt_cmd_limit = 1.2;  // rad, actuation authority of the tilt loop
  double thrust_min = 0.3 * 9.81;  // m/s^2, mass-normalized
  double thrust_max = 1.7 * 9.81;  // m/s^2
  Eigen::Vector3d flight_lower{-5.0, -5.0, 0.2};  // m
  Eigen::Vector3d flight_upper{5.0, 5.0, 4.0};    // m
  double velocity_limit = 4.0;  // m/s per axis

  double hover_thrust() const { return mass * gravity; }  // N

  void validate() const {
    if (!(mass > 0.0)) throw InvalidParameterError("QuadParams: mass must be positive");
    if (!(gravity > 0.0)) throw InvalidParameterError("QuadParams: gravity must be positive");
    if (!(tilt_tau > 0.0)) throw InvalidParameterError("QuadParams: tilt_tau must be positive");
    if (drag_coeff < 0.0) throw InvalidParameterError("QuadParams: drag_coeff must be >= 0");
    if (!(tilt_limit > 0.0) || !(tilt_cmd_limit >= tilt_limit) || !(velocity_limit > 0.0) ||
        !(thrust_max > thrust_min))
      throw InvalidParameterError("QuadParams: degenerate limits");
    for (int i = 0; i < 3; ++i)
      if (!(flight_lower[i] < flight_upper[i]))
        throw InvalidParameterError("QuadParams: empty flight-space box");
  }
};

// State ordering: [px, py, pz, vx, vy, vz, roll, pitch].
// Input ordering (hover-relative): [thrust, roll_cmd, pitch_cmd].
constexpr int kNx = 8;
constexpr int kNu = 3;

const std::vector<std::string>& state_axis_names();
const std::vector<std::string>& input_axis_names();

// Forward-Euler discretization of the hover linearization. Tilt enters
// acceleration with the small-angle gain g; tilt itself follows a first-order
// lag toward the command. Inputs are hover-relative.
LtiModel linearize_quadrotor_hover(const QuadParams& params, double dt);

// Constraint boxes induced by QuadParams, in the model's coordinates.
BoxSet state_constraint_box(const QuadParams& params);
BoxSet input_constraint_box(const QuadParams& params);  // hover-relative inputs

// Minkowski difference X (-) Z for boxes (Z.lower <= 0 <= Z.upper assumed).
// Throws InfeasibleTighteningError naming the first empty axis.
BoxSet tighten_state_box(const BoxSet& X, const BoxSet& Z,
                         const std::vector<std::string>& axis_names = {});

// U (-) K Z via interval arithmetic: each output axis j shrinks symmetrically
// by sum_i |K(j,i)| * max(|Z.lower_i|, |Z.upper_i|).
BoxSet tighten_input_box(const BoxSet& U, const Matrix& K, const BoxSet& Z,
                         const std::vector<std::string>& axis_names = {});

}  // namespace rtil
