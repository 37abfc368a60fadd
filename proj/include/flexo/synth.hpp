#ifndef FLEXO_SYNTH_HPP
#define FLEXO_SYNTH_HPP

#include <array>
#include <cstdint>
#include <string>

#include "flexo/frameio.hpp"
#include "flexo/kinematics.hpp"
#include "flexo/registration.hpp"
#include "flexo/track.hpp"

namespace flexo {

struct NoiseParams {
  double pixel_sigma = 0.0;   // px, on the rendered disk centers
  double depth_sigma = 0.0;   // mm, one draw per marker per frame
  double dropout_prob = 0.0;  // per marker per frame
};

/// Analytic flexo-extension profile: phi(t) = A sin(2 pi t / T), a rigid
/// rotation of the headband markers about the pivot in the sagittal plane
/// while MA1 and MS1 stay fixed.
struct MotionProfile {
  double amplitude_deg = 46.0;   // in (0, 90)
  double period_s = 8.0;
  int n_cycles = 3;
  double fps = 30.0;
  double head_radius_cm = 20.0;  // headband rig offset from the pivot
  Point3D pivot_cm = Point3D(0.0, 5.0, 170.0);
  std::array<double, 3> marker_angles_deg = {30.0, 90.0, 150.0};  // MT1..MT3
  NoiseParams noise;
  std::uint64_t seed = 0;
};

void validate(const MotionProfile& profile);

/// Exact trajectories and kinematics for a profile; the oracle the
/// end-to-end tests close against.
struct GroundTruth {
  std::vector<Trajectory3D> trajectories;  // all five roles
  AngleSeries phi_exact;
  KinematicReport report_exact;  // rom = 2 A, harmony = -(2 pi / T)^2
  double fps = 30.0;
};

GroundTruth generate_motion(const MotionProfile& profile);

/// Rasterizes the ground truth into a session bundle: bright disks on a
/// gray RGB background, constant-depth disks over a 1900 mm wall in the
/// depth stream, the depth disk shifted by `offset` from its RGB twin.
/// Pixel noise perturbs disk centers, depth noise the per-disk value (and
/// enables random zeroing of disk border pixels, mimicking reflectance
/// misses at marker edges); dropout removes both disks for a frame. All
/// draws derive from (seed, frame, role), so equal seeds give bit-equal
/// bundles. Throws OutOfFrustumError if any marker leaves the view.
SessionBundle render_session(const GroundTruth& truth, const CameraModel& cam,
                             const Offset2D& offset, const NoiseParams& noise,
                             std::uint64_t seed, const std::string& subject_id,
                             const std::string& session_id, TrialKind trial_kind);

/// Rendered disk radius in pixels; tests size area bands around it.
inline constexpr double kDiskRadiusPx = 4.0;

}  // namespace flexo

#endif  // FLEXO_SYNTH_HPP
