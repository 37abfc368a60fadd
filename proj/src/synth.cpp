#include "flexo/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace flexo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr std::uint16_t kWallDepthMm = 1900;
constexpr std::uint8_t kBackgroundGray = 80;
constexpr double kEarOffsetCm = 4.0;    // MA1 below the pivot
constexpr double kChairOffsetCm = 40.0; // MS1 further below
constexpr double kBorderZeroProb = 0.25;

// SplitMix64; decorrelates the per-(frame, role) stream seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream_for(std::uint64_t seed, int frame, int role_index) {
  return std::mt19937_64(mix(seed ^ mix(static_cast<std::uint64_t>(frame) * 5 +
                                        static_cast<std::uint64_t>(role_index) + 1)));
}

}  // namespace

void validate(const MotionProfile& profile) {
  if (!(profile.amplitude_deg > 0 && profile.amplitude_deg < 90))
    throw ValidationError("amplitude must lie in (0, 90) degrees");
  if (!(profile.period_s > 0)) throw ValidationError("period must be positive");
  if (profile.n_cycles < 1) throw ValidationError("n_cycles must be >= 1");
  if (!(profile.fps > 0)) throw ValidationError("fps must be positive");
  if (!(profile.head_radius_cm > 0)) throw ValidationError("head radius must be positive");
  if (!(profile.noise.dropout_prob >= 0 && profile.noise.dropout_prob < 1))
    throw ValidationError("dropout probability must lie in [0, 1)");
  if (profile.noise.pixel_sigma < 0 || profile.noise.depth_sigma < 0)
    throw ValidationError("noise sigmas must be nonnegative");
}

GroundTruth generate_motion(const MotionProfile& profile) {
  validate(profile);

  const Eigen::Vector3d u_forward(-1, 0, 0);
  const Eigen::Vector3d u_up(0, 1, 0);
  const double omega_rad = 2.0 * std::numbers::pi / profile.period_s;
  const int n_frames =
      static_cast<int>(std::lround(profile.n_cycles * profile.period_s * profile.fps));

  GroundTruth truth;
  truth.fps = profile.fps;
  for (MarkerRole role : kAllRoles) truth.trajectories.push_back({role, {}});

  const Point3D ma1 = profile.pivot_cm - kEarOffsetCm * u_up;
  const Point3D ms1 = profile.pivot_cm - kChairOffsetCm * u_up;

  truth.phi_exact.t.resize(n_frames);
  truth.phi_exact.phi.resize(n_frames);
  truth.phi_exact.omega.resize(n_frames);
  truth.phi_exact.omega_dot.resize(n_frames);

  for (int i = 0; i < n_frames; ++i) {
    const double t = i / profile.fps;
    const double phi_deg = profile.amplitude_deg * std::sin(omega_rad * t);
    truth.phi_exact.t(i) = t;
    truth.phi_exact.phi(i) = phi_deg;
    truth.phi_exact.omega(i) = profile.amplitude_deg * omega_rad * std::cos(omega_rad * t);
    truth.phi_exact.omega_dot(i) =
        -profile.amplitude_deg * omega_rad * omega_rad * std::sin(omega_rad * t);

    for (std::size_t r = 0; r < kAllRoles.size(); ++r) {
      const MarkerRole role = kAllRoles[r];
      Point3D p;
      if (role == MarkerRole::MA1) {
        p = ma1;
      } else if (role == MarkerRole::MS1) {
        p = ms1;
      } else {
        const double theta = (profile.marker_angles_deg[r] + phi_deg) * kDegToRad;
        p = profile.pivot_cm + profile.head_radius_cm *
                                   (std::cos(theta) * u_forward + std::sin(theta) * u_up);
      }
      truth.trajectories[r].samples.push_back({t, p, true});
    }
  }

  truth.report_exact.max_angle_deg = profile.amplitude_deg;
  truth.report_exact.rom_deg = 2.0 * profile.amplitude_deg;
  truth.report_exact.mean_omega_deg_s = 0.0;
  truth.report_exact.harmony = -omega_rad * omega_rad;
  truth.report_exact.chair_ok = true;
  truth.report_exact.series = truth.phi_exact;
  return truth;
}

namespace {

void draw_rgb_disk(RgbFrame& frame, double cx, double cy) {
  const int r = static_cast<int>(std::ceil(kDiskRadiusPx));
  const int x0 = std::max(0, static_cast<int>(std::floor(cx)) - r - 1);
  const int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(cx)) + r + 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(cy)) - r - 1);
  const int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(cy)) + r + 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= kDiskRadiusPx * kDiskRadiusPx) {
        frame.at(x, y, 0) = 255;
        frame.at(x, y, 1) = 255;
        frame.at(x, y, 2) = 255;
      }
    }
}

void draw_depth_disk(DepthFrame& frame, double cx, double cy, std::uint16_t value,
                     bool border_artifacts, std::mt19937_64& rng) {
  const int r = static_cast<int>(std::ceil(kDiskRadiusPx));
  const int x0 = std::max(0, static_cast<int>(std::floor(cx)) - r - 1);
  const int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(cx)) + r + 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(cy)) - r - 1);
  const int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(cy)) + r + 1);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double inner = (kDiskRadiusPx - 1.0) * (kDiskRadiusPx - 1.0);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double d2 = dx * dx + dy * dy;
      if (d2 > kDiskRadiusPx * kDiskRadiusPx) continue;
      if (border_artifacts && d2 > inner && uni(rng) < kBorderZeroProb) {
        frame.at(x, y) = 0;  // unread sensor pixel at the reflective rim
      } else {
        frame.at(x, y) = value;
      }
    }
}

}  // namespace

SessionBundle render_session(const GroundTruth& truth, const CameraModel& cam,
                             const Offset2D& offset, const NoiseParams& noise,
                             std::uint64_t seed, const std::string& subject_id,
                             const std::string& session_id, TrialKind trial_kind) {
  validate(cam);
  const int n_frames = static_cast<int>(truth.trajectories.at(0).samples.size());
  if (n_frames < 1) throw ValidationError("ground truth has no frames");

  SessionBundle bundle;
  bundle.manifest.width = cam.width;
  bundle.manifest.height = cam.height;
  bundle.manifest.fps = truth.fps;
  bundle.manifest.frame_count = n_frames;
  bundle.manifest.subject_id = subject_id;
  bundle.manifest.session_id = session_id;
  bundle.manifest.trial_kind = trial_kind;
  bundle.rgb.reserve(n_frames);
  bundle.depth.reserve(n_frames);

  for (int f = 0; f < n_frames; ++f) {
    RgbFrame rgb;
    rgb.width = cam.width;
    rgb.height = cam.height;
    rgb.pixels.assign(static_cast<std::size_t>(cam.width) * cam.height * 3, kBackgroundGray);
    DepthFrame depth;
    depth.width = cam.width;
    depth.height = cam.height;
    depth.values.assign(static_cast<std::size_t>(cam.width) * cam.height, kWallDepthMm);

    for (std::size_t r = 0; r < kAllRoles.size(); ++r) {
      const TrajectorySample& sample = truth.trajectories[r].samples[f];
      const PixelDepth proj = project_to_pixel(cam, sample.p);

      std::mt19937_64 rng = stream_for(seed, f, static_cast<int>(r));
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::uniform_real_distribution<double> uni(0.0, 1.0);

      double cx = proj.a, cy = proj.b;
      if (noise.pixel_sigma > 0) {
        cx += noise.pixel_sigma * gauss(rng);
        cy += noise.pixel_sigma * gauss(rng);
      }
      double depth_mm = proj.depth_mm;
      if (noise.depth_sigma > 0) depth_mm += noise.depth_sigma * gauss(rng);
      const bool dropped = noise.dropout_prob > 0 && uni(rng) < noise.dropout_prob;
      if (dropped) continue;

      draw_rgb_disk(rgb, cx, cy);
      const auto value = static_cast<std::uint16_t>(
          std::clamp(std::lround(depth_mm), 1L, 65535L));
      draw_depth_disk(depth, cx + offset.dx, cy + offset.dy, value,
                      noise.depth_sigma > 0, rng);
    }

    bundle.rgb.push_back(std::move(rgb));
    bundle.depth.push_back(std::move(depth));
  }
  return bundle;
}

}  // namespace flexo
