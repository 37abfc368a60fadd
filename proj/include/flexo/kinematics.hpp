#ifndef FLEXO_KINEMATICS_HPP
#define FLEXO_KINEMATICS_HPP

#include <vector>

#include <Eigen/Core>

#include "flexo/track.hpp"
#include "flexo/types.hpp"

namespace flexo {

/// Subject-local sagittal reference built from a static trial: MA1 as the
/// spatial origin, the camera's -x / +y axes spanning the sagittal plane,
/// and the resting MT1->MT3 head-line angle phi0.
struct ReferenceFrame {
  Point3D origin = Point3D::Zero();
  Eigen::Vector3d u_forward = Eigen::Vector3d(-1, 0, 0);
  Eigen::Vector3d u_up = Eigen::Vector3d(0, 1, 0);
  double phi0_deg = 0;
};

struct AngleSeries {
  Eigen::VectorXd t;          // seconds
  Eigen::VectorXd phi;        // degrees
  Eigen::VectorXd omega;      // degrees/s
  Eigen::VectorXd omega_dot;  // degrees/s^2
};

struct KinematicReport {
  double max_angle_deg = 0;
  double rom_deg = 0;            // max(phi) - min(phi)
  double mean_omega_deg_s = 0;   // signed mean
  double harmony = 0;            // OLS slope of omega_dot on phi, (deg/s^2)/deg
  AngleSeries series;
  bool chair_ok = true;
};

struct KinematicsParams {
  int smooth_window = 11;
  int smooth_order = 2;
  double chair_threshold_cm = 0.5;
};

/// Builds the reference frame from >= 30 static frames of all five roles.
/// Throws MissingRoleError / UnstableStaticError (marker RMS deviation
/// above 1 cm) / ValidationError on short trials.
ReferenceFrame build_reference(const std::vector<Trajectory3D>& static_trajectories);

/// Signed sagittal-plane angle of the MT1->MT3 chord relative to the
/// static head line, in (-180, 180] degrees. Extension (head back) is
/// positive. Throws ValidationError when the projected chord is shorter
/// than 1e-6 cm.
double flexion_angle(const Point3D& mt1, const Point3D& mt3, const ReferenceFrame& ref);

/// Savitzky-Golay smoothing: least-squares polynomial of `order` fitted in
/// a sliding window of odd length, evaluated at the center; windows shrink
/// one-sidedly at the edges. Requires order < window <= series length.
Eigen::VectorXd smooth(const Eigen::VectorXd& series, int window, int order);

/// Central differences in the interior, second-order one-sided stencils at
/// the two edges. Requires length >= 3 and dt > 0.
Eigen::VectorXd differentiate(const Eigen::VectorXd& series, double dt);

/// Ordinary least-squares slope of omega_dot regressed on phi; -Omega^2
/// for pure harmonic motion. Throws ValidationError when phi has zero
/// variance.
double harmony(const Eigen::VectorXd& phi, const Eigen::VectorXd& omega_dot);

/// True iff MS1 never strays farther than threshold_cm from its first
/// sample.
bool check_chair(const Trajectory3D& ms1, double threshold_cm);

/// Full per-session analysis: phi per frame, smoothing, differentiation,
/// scalar summary and the chair check. MT1, MT3 and MS1 must be present
/// and time-aligned on a uniform grid.
KinematicReport analyze_session(const std::vector<Trajectory3D>& trajectories,
                                const ReferenceFrame& ref, const KinematicsParams& params);

}  // namespace flexo

#endif  // FLEXO_KINEMATICS_HPP
