#include "flexo/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace flexo {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr int kMinStaticFrames = 30;
constexpr double kMaxStaticRmsCm = 1.0;
constexpr double kDegenerateChordCm = 1e-6;

double wrap_deg(double a) {
  a = std::fmod(a + 180.0, 360.0);
  if (a <= 0.0) a += 360.0;
  return a - 180.0;
}

const Trajectory3D* find_role(const std::vector<Trajectory3D>& trajectories, MarkerRole role) {
  for (const Trajectory3D& tr : trajectories)
    if (tr.role == role) return &tr;
  return nullptr;
}

const Trajectory3D& require_role(const std::vector<Trajectory3D>& trajectories, MarkerRole role) {
  const Trajectory3D* tr = find_role(trajectories, role);
  if (!tr || tr->samples.empty()) throw MissingRoleError(role);
  return *tr;
}

Point3D mean_position(const Trajectory3D& tr) {
  Point3D sum = Point3D::Zero();
  for (const TrajectorySample& s : tr.samples) sum += s.p;
  return sum / static_cast<double>(tr.samples.size());
}

double rms_deviation(const Trajectory3D& tr, const Point3D& mean) {
  double acc = 0;
  for (const TrajectorySample& s : tr.samples) acc += (s.p - mean).squaredNorm();
  return std::sqrt(acc / static_cast<double>(tr.samples.size()));
}

// Angle of a chord in the sagittal plane, degrees, before phi0 removal.
double chord_angle(const Point3D& d, const ReferenceFrame& ref) {
  const double f = d.dot(ref.u_forward);
  const double u = d.dot(ref.u_up);
  if (std::hypot(f, u) < kDegenerateChordCm)
    throw ValidationError("head-line projection onto the sagittal plane is degenerate");
  return std::atan2(u, f) * kRadToDeg;
}

}  // namespace

ReferenceFrame build_reference(const std::vector<Trajectory3D>& static_trajectories) {
  for (MarkerRole role : kAllRoles) require_role(static_trajectories, role);
  const Trajectory3D& ma1 = require_role(static_trajectories, MarkerRole::MA1);
  if (static_cast<int>(ma1.samples.size()) < kMinStaticFrames)
    throw ValidationError("static trial must span at least " +
                          std::to_string(kMinStaticFrames) + " frames");

  for (MarkerRole role : kAllRoles) {
    const Trajectory3D& tr = require_role(static_trajectories, role);
    const double rms = rms_deviation(tr, mean_position(tr));
    if (rms > kMaxStaticRmsCm)
      throw UnstableStaticError(std::string(to_string(role)) + " moved " +
                                std::to_string(rms) + " cm RMS during the static trial");
  }

  ReferenceFrame ref;
  // The sagittal plane is spanned by the camera's lateral and vertical
  // axes; forward is -x so that extension comes out positive.
  ref.u_forward = Eigen::Vector3d(-1, 0, 0);
  ref.u_up = Eigen::Vector3d(0, 1, 0);
  ref.origin = mean_position(ma1);

  const Point3D mt1 = mean_position(require_role(static_trajectories, MarkerRole::MT1));
  const Point3D mt3 = mean_position(require_role(static_trajectories, MarkerRole::MT3));
  ref.phi0_deg = chord_angle(mt3 - mt1, ref);
  return ref;
}

double flexion_angle(const Point3D& mt1, const Point3D& mt3, const ReferenceFrame& ref) {
  return wrap_deg(chord_angle(mt3 - mt1, ref) - ref.phi0_deg);
}

Eigen::VectorXd smooth(const Eigen::VectorXd& series, int window, int order) {
  if (window < 1 || window % 2 == 0) throw ValidationError("smoothing window must be odd");
  if (order < 0 || order >= window) throw ValidationError("smoothing order must be < window");
  const int n = static_cast<int>(series.size());
  if (n < window) throw ValidationError("series shorter than the smoothing window");

  const int half = window / 2;
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    const int m = hi - lo + 1;
    const int ord = std::min(order, m - 1);
    // Fit in a coordinate centered on i; the constant term is the value.
    Eigen::MatrixXd vand(m, ord + 1);
    for (int r = 0; r < m; ++r) {
      const double x = static_cast<double>(lo + r - i);
      double pw = 1.0;
      for (int c = 0; c <= ord; ++c) {
        vand(r, c) = pw;
        pw *= x;
      }
    }
    const Eigen::VectorXd beta =
        vand.colPivHouseholderQr().solve(series.segment(lo, m));
    out(i) = beta(0);
  }
  return out;
}

Eigen::VectorXd differentiate(const Eigen::VectorXd& series, double dt) {
  const int n = static_cast<int>(series.size());
  if (n < 3) throw ValidationError("differentiation needs at least 3 samples");
  if (!(dt > 0)) throw ValidationError("dt must be positive");

  Eigen::VectorXd out(n);
  out(0) = (-3.0 * series(0) + 4.0 * series(1) - series(2)) / (2.0 * dt);
  for (int i = 1; i < n - 1; ++i) out(i) = (series(i + 1) - series(i - 1)) / (2.0 * dt);
  out(n - 1) = (3.0 * series(n - 1) - 4.0 * series(n - 2) + series(n - 3)) / (2.0 * dt);
  return out;
}

double harmony(const Eigen::VectorXd& phi, const Eigen::VectorXd& omega_dot) {
  if (phi.size() != omega_dot.size() || phi.size() < 2)
    throw ValidationError("harmony needs two equal-length series of >= 2 samples");
  const Eigen::VectorXd dp = phi.array() - phi.mean();
  const double var = dp.squaredNorm();
  if (var <= 0) throw ValidationError("phi has zero variance");
  const Eigen::VectorXd da = omega_dot.array() - omega_dot.mean();
  return dp.dot(da) / var;
}

bool check_chair(const Trajectory3D& ms1, double threshold_cm) {
  if (ms1.samples.empty()) throw ValidationError("chair trajectory is empty");
  const Point3D first = ms1.samples.front().p;
  for (const TrajectorySample& s : ms1.samples)
    if ((s.p - first).norm() > threshold_cm) return false;
  return true;
}

KinematicReport analyze_session(const std::vector<Trajectory3D>& trajectories,
                                const ReferenceFrame& ref, const KinematicsParams& params) {
  const Trajectory3D& mt1 = require_role(trajectories, MarkerRole::MT1);
  const Trajectory3D& mt3 = require_role(trajectories, MarkerRole::MT3);
  const Trajectory3D& ms1 = require_role(trajectories, MarkerRole::MS1);

  const int n = static_cast<int>(mt1.samples.size());
  if (static_cast<int>(mt3.samples.size()) != n)
    throw ValidationError("MT1 and MT3 trajectories are not time-aligned");

  Eigen::VectorXd t(n), phi_raw(n);
  for (int i = 0; i < n; ++i) {
    if (mt3.samples[i].t != mt1.samples[i].t)
      throw ValidationError("MT1 and MT3 trajectories are not time-aligned");
    t(i) = mt1.samples[i].t;
    phi_raw(i) = flexion_angle(mt1.samples[i].p, mt3.samples[i].p, ref);
  }
  if (n < 3) throw ValidationError("session too short to analyze");
  const double dt = (t(n - 1) - t(0)) / (n - 1);
  for (int i = 1; i < n; ++i)
    if (std::abs(t(i) - t(i - 1) - dt) > 1e-9)
      throw ValidationError("samples are not on a uniform time grid");

  KinematicReport report;
  report.series.t = t;
  report.series.phi = smooth(phi_raw, params.smooth_window, params.smooth_order);
  report.series.omega = differentiate(report.series.phi, dt);
  report.series.omega_dot = differentiate(report.series.omega, dt);

  report.max_angle_deg = report.series.phi.maxCoeff();
  report.rom_deg = report.series.phi.maxCoeff() - report.series.phi.minCoeff();
  report.mean_omega_deg_s = report.series.omega.mean();
  report.harmony = harmony(report.series.phi, report.series.omega_dot);
  report.chair_ok = check_chair(ms1, params.chair_threshold_cm);
  return report;
}

}  // namespace flexo
