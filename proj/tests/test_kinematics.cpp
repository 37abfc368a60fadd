#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "flexo/kinematics.hpp"

using namespace flexo;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Marker rig rotating about a pivot in the sagittal plane, mirroring the
// physical headband geometry but built directly in 3D.
struct Rig {
  Point3D pivot = Point3D(0, 5, 170);
  double radius = 20.0;
  double mt1_angle = 30.0, mt3_angle = 150.0;
  Eigen::Vector3d fwd = Eigen::Vector3d(-1, 0, 0);
  Eigen::Vector3d up = Eigen::Vector3d(0, 1, 0);

  Point3D mt(double marker_angle_deg, double phi_deg) const {
    const double a = (marker_angle_deg + phi_deg) * kDegToRad;
    return pivot + radius * (std::cos(a) * fwd + std::sin(a) * up);
  }
};

std::vector<Trajectory3D> rig_trajectories(const Rig& rig, const Eigen::VectorXd& t,
                                           const Eigen::VectorXd& phi, double noise_cm = 0.0,
                                           unsigned seed = 1) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, noise_cm);
  auto jitter = [&](const Point3D& p) {
    return noise_cm > 0 ? Point3D(p.x() + g(rng), p.y() + g(rng), p.z() + g(rng)) : p;
  };
  std::vector<Trajectory3D> out;
  for (MarkerRole role : kAllRoles) out.push_back({role, {}});
  for (int i = 0; i < t.size(); ++i) {
    out[0].samples.push_back({t(i), jitter(rig.mt(rig.mt1_angle, phi(i))), true});
    out[1].samples.push_back({t(i), jitter(rig.mt(90.0, phi(i))), true});
    out[2].samples.push_back({t(i), jitter(rig.mt(rig.mt3_angle, phi(i))), true});
    out[3].samples.push_back({t(i), jitter(rig.pivot - 4.0 * rig.up), true});
    out[4].samples.push_back({t(i), jitter(rig.pivot - 40.0 * rig.up), true});
  }
  return out;
}

Eigen::VectorXd times(int n, double fps = 30.0) {
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i) t(i) = i / fps;
  return t;
}

}  // namespace

TEST_CASE("reference frame from a static rig") {
  Rig rig;
  const Eigen::VectorXd t = times(60);
  const auto statics = rig_trajectories(rig, t, Eigen::VectorXd::Zero(60));
  const ReferenceFrame ref = build_reference(statics);
  CHECK((ref.origin - (rig.pivot - 4.0 * rig.up)).norm() < 1e-9);
  CHECK(ref.u_forward.dot(ref.u_up) == doctest::Approx(0.0));
  // the MT1->MT3 chord points straight backward at rest
  CHECK(ref.phi0_deg == doctest::Approx(180.0));

  // a marker already rotated by 10 degrees reads as 10 degrees
  const double phi = flexion_angle(rig.mt(rig.mt1_angle, 10.0), rig.mt(rig.mt3_angle, 10.0), ref);
  CHECK(phi == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("reference frame repeatability under noise") {
  Rig rig;
  const Eigen::VectorXd t = times(90);
  const auto a = rig_trajectories(rig, t, Eigen::VectorXd::Zero(90), 0.2, 11);
  const auto b = rig_trajectories(rig, t, Eigen::VectorXd::Zero(90), 0.2, 22);
  CHECK(std::abs(build_reference(a).phi0_deg - build_reference(b).phi0_deg) < 0.5);
}

TEST_CASE("reference frame error paths") {
  Rig rig;
  const Eigen::VectorXd t = times(60);
  auto statics = rig_trajectories(rig, t, Eigen::VectorXd::Zero(60));

  SUBCASE("missing role") {
    statics.erase(statics.begin() + 3);  // MA1
    CHECK_THROWS_AS(build_reference(statics), MissingRoleError);
  }
  SUBCASE("short trial") {
    for (auto& tr : statics) tr.samples.resize(10);
    CHECK_THROWS_AS(build_reference(statics), ValidationError);
  }
  SUBCASE("unstable static") {
    for (int i = 0; i < 60; ++i) statics[4].samples[i].p.x() += 0.1 * i;  // drifting chair
    CHECK_THROWS_AS(build_reference(statics), UnstableStaticError);
  }
}

TEST_CASE("flexion angle edge cases") {
  ReferenceFrame ref;
  ref.phi0_deg = 0.0;
  CHECK(flexion_angle(Point3D(0, 0, 170), Point3D(-10, 0, 170), ref) == doctest::Approx(0.0));
  CHECK(flexion_angle(Point3D(0, 0, 170), Point3D(0, 10, 170), ref) == doctest::Approx(90.0));
  CHECK_THROWS_AS(flexion_angle(Point3D(1, 2, 3), Point3D(1, 2, 3), ref), ValidationError);
  // purely out-of-plane chord degenerates
  CHECK_THROWS_AS(flexion_angle(Point3D(0, 0, 100), Point3D(0, 0, 120), ref), ValidationError);
}

TEST_CASE("smoothing reproduces low-order polynomials") {
  Eigen::VectorXd constant = Eigen::VectorXd::Constant(50, 3.25);
  CHECK((smooth(constant, 11, 2) - constant).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::VectorXd linear(50);
  for (int i = 0; i < 50; ++i) linear(i) = -2.0 + 0.5 * i;
  CHECK((smooth(linear, 11, 1) - linear).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((smooth(linear, 11, 2) - linear).cwiseAbs().maxCoeff() < 1e-9);

  CHECK_THROWS_AS(smooth(Eigen::VectorXd::Zero(5), 11, 2), ValidationError);
  CHECK_THROWS_AS(smooth(constant, 10, 2), ValidationError);
  CHECK_THROWS_AS(smooth(constant, 11, 11), ValidationError);
}

TEST_CASE("smoothing reduces noise on a sine") {
  std::mt19937 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 400;
  Eigen::VectorXd clean(n), noisy(n);
  for (int i = 0; i < n; ++i) {
    clean(i) = 30.0 * std::sin(2 * std::numbers::pi * i / 240.0);
    noisy(i) = clean(i) + g(rng);
  }
  const Eigen::VectorXd smoothed = smooth(noisy, 11, 2);
  CHECK((smoothed - clean).norm() < (noisy - clean).norm());
}

TEST_CASE("differentiation") {
  const double dt = 1.0 / 30.0;
  Eigen::VectorXd ramp(60);
  for (int i = 0; i < 60; ++i) ramp(i) = 5.0 * i * dt;
  const Eigen::VectorXd d = differentiate(ramp, dt);
  CHECK((d.array() - 5.0).abs().maxCoeff() < 1e-9);

  Eigen::VectorXd constant = Eigen::VectorXd::Constant(60, 2.0);
  CHECK(differentiate(constant, dt).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(differentiate(Eigen::VectorXd::Zero(2), dt), ValidationError);
  CHECK_THROWS_AS(differentiate(ramp, 0.0), ValidationError);
}

TEST_CASE("differentiation converges at second order") {
  auto max_err = [](double dt) {
    const int n = static_cast<int>(std::lround(2.0 / dt)) + 1;
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = std::sin(i * dt);
    const Eigen::VectorXd d = differentiate(y, dt);
    double err = 0;
    for (int i = 1; i < n - 1; ++i) err = std::max(err, std::abs(d(i) - std::cos(i * dt)));
    return err;
  };
  const double e1 = max_err(0.02), e2 = max_err(0.01);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("smooth then differentiate is exact on quadratics away from edges") {
  const double dt = 1.0 / 30.0;
  const int n = 200;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    y(i) = 1.5 * t * t - 0.7 * t + 2.0;
  }
  const Eigen::VectorXd d = differentiate(smooth(y, 11, 2), dt);
  for (int i = 6; i < n - 6; ++i) {
    const double t = i * dt;
    CHECK(std::abs(d(i) - (3.0 * t - 0.7)) < 1e-6);
  }
}

TEST_CASE("harmony of analytic signals") {
  const int n = 720;
  const double dt = 1.0 / 30.0;
  const double omega = 0.785;
  Eigen::VectorXd phi(n), acc(n);
  for (int i = 0; i < n; ++i) {
    phi(i) = 30.0 * std::sin(omega * i * dt);
    acc(i) = -omega * omega * phi(i);
  }
  CHECK(harmony(phi, acc) == doctest::Approx(-omega * omega).epsilon(1e-12));
  CHECK(-omega * omega == doctest::Approx(-0.6166).epsilon(1e-3));

  CHECK(harmony(phi, Eigen::VectorXd::Constant(n, 4.2)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(harmony(Eigen::VectorXd::Constant(n, 1.0), acc), ValidationError);
}

TEST_CASE("harmony stays within 2% of -omega^2 through the numeric chain") {
  for (double omega : {0.4, 0.785, 1.2, 1.6}) {
    const double fps = 30.0;
    const int n = static_cast<int>(3 * std::lround(2 * std::numbers::pi / omega * fps));
    Eigen::VectorXd phi(n);
    for (int i = 0; i < n; ++i) phi(i) = 40.0 * std::sin(omega * i / fps);
    const Eigen::VectorXd phis = smooth(phi, 11, 2);
    const Eigen::VectorXd w = differentiate(phis, 1 / fps);
    const Eigen::VectorXd a = differentiate(w, 1 / fps);
    CHECK(harmony(phis, a) == doctest::Approx(-omega * omega).epsilon(0.02));
  }
}

TEST_CASE("chair check") {
  Trajectory3D ms1{MarkerRole::MS1, {}};
  for (int i = 0; i < 100; ++i) ms1.samples.push_back({i / 30.0, Point3D(1, 2, 170), true});
  CHECK(check_chair(ms1, 0.5));

  Trajectory3D drifting = ms1;
  for (int i = 0; i < 100; ++i) drifting.samples[i].p.x() += 0.02 * i;  // ends 2 cm away
  CHECK(!check_chair(drifting, 0.5));

  std::mt19937 rng(8);
  std::normal_distribution<double> g(0.0, 0.1);
  Trajectory3D noisy = ms1;
  for (auto& s : noisy.samples) s.p += Point3D(g(rng), g(rng), g(rng));
  CHECK(check_chair(noisy, 0.5));
}

TEST_CASE("analyze_session on analytic motion") {
  Rig rig;
  const int n = 720;
  const Eigen::VectorXd t = times(n);
  Eigen::VectorXd phi(n);
  for (int i = 0; i < n; ++i) phi(i) = 46.0 * std::sin(2 * std::numbers::pi * t(i) / 8.0);

  const auto statics = rig_trajectories(rig, times(60), Eigen::VectorXd::Zero(60));
  const ReferenceFrame ref = build_reference(statics);
  const auto motion = rig_trajectories(rig, t, phi);

  KinematicsParams params;
  const KinematicReport report = analyze_session(motion, ref, params);
  CHECK(report.rom_deg == doctest::Approx(92.0).epsilon(0.02));
  CHECK(report.max_angle_deg == doctest::Approx(46.0).epsilon(0.02));
  CHECK(std::abs(report.mean_omega_deg_s) < 0.05);
  CHECK(report.harmony == doctest::Approx(-std::pow(2 * std::numbers::pi / 8.0, 2)).epsilon(0.05));
  CHECK(report.chair_ok);
  CHECK(report.rom_deg == doctest::Approx(report.series.phi.maxCoeff() -
                                          report.series.phi.minCoeff()));
}

TEST_CASE("analyze_session on a static pose") {
  Rig rig;
  const Eigen::VectorXd t = times(90);
  // a hair of sensor jitter, as any real static capture has
  const auto statics = rig_trajectories(rig, t, Eigen::VectorXd::Zero(90), 1e-3, 5);
  const ReferenceFrame ref = build_reference(statics);
  const KinematicReport report = analyze_session(statics, ref, KinematicsParams{});
  CHECK(report.rom_deg < 1.0);
  CHECK(std::abs(report.mean_omega_deg_s) < 0.05);
}

TEST_CASE("rom is shift invariant, max angle shifts along") {
  Rig rig;
  const int n = 300;
  const Eigen::VectorXd t = times(n);
  Eigen::VectorXd phi(n), shifted(n);
  for (int i = 0; i < n; ++i) {
    phi(i) = 20.0 * std::sin(2 * std::numbers::pi * t(i) / 4.0);
    shifted(i) = phi(i) + 15.0;
  }
  const ReferenceFrame ref =
      build_reference(rig_trajectories(rig, times(60), Eigen::VectorXd::Zero(60)));
  const KinematicReport a = analyze_session(rig_trajectories(rig, t, phi), ref, {});
  const KinematicReport b = analyze_session(rig_trajectories(rig, t, shifted), ref, {});
  CHECK(a.rom_deg == doctest::Approx(b.rom_deg).epsilon(1e-6));
  CHECK(b.max_angle_deg - a.max_angle_deg == doctest::Approx(15.0).epsilon(1e-6));
}

TEST_CASE("analysis is invariant to rigid translation of the scene") {
  Rig rig;
  const int n = 300;
  const Eigen::VectorXd t = times(n);
  Eigen::VectorXd phi(n);
  for (int i = 0; i < n; ++i) phi(i) = 25.0 * std::sin(2 * std::numbers::pi * t(i) / 5.0);

  ReferenceFrame ref =
      build_reference(rig_trajectories(rig, times(60), Eigen::VectorXd::Zero(60)));
  const KinematicReport a = analyze_session(rig_trajectories(rig, t, phi), ref, {});

  const Point3D shift(3.0, -2.0, 12.0);
  auto moved = rig_trajectories(rig, t, phi);
  for (auto& tr : moved)
    for (auto& s : tr.samples) s.p += shift;
  ReferenceFrame moved_ref = ref;
  moved_ref.origin += shift;
  const KinematicReport b = analyze_session(moved, moved_ref, {});
  CHECK(a.rom_deg == doctest::Approx(b.rom_deg).epsilon(1e-12));
  CHECK(a.harmony == doctest::Approx(b.harmony).epsilon(1e-12));
}

TEST_CASE("analyze_session rejects missing or misaligned inputs") {
  Rig rig;
  const Eigen::VectorXd t = times(60);
  auto trajs = rig_trajectories(rig, t, Eigen::VectorXd::Zero(60));
  const ReferenceFrame ref = build_reference(trajs);

  auto missing = trajs;
  missing.erase(missing.begin());  // MT1
  CHECK_THROWS_AS(analyze_session(missing, ref, {}), MissingRoleError);

  auto misaligned = trajs;
  misaligned[2].samples.pop_back();
  CHECK_THROWS_AS(analyze_session(misaligned, ref, {}), ValidationError);
}
