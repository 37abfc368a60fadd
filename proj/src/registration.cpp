#include "flexo/registration.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace flexo {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
}  // namespace

void validate(const CameraModel& cam) {
  if (cam.width <= 0 || cam.height <= 0)
    throw ValidationError("camera dimensions must be positive");
  if (!(cam.hfov_deg > 0 && cam.hfov_deg < 180) || !(cam.vfov_deg > 0 && cam.vfov_deg < 180))
    throw ValidationError("camera fov must lie in (0, 180) degrees");
  if (!(cam.center_x > 0 && cam.center_x < cam.width) ||
      !(cam.center_y > 0 && cam.center_y < cam.height))
    throw ValidationError("camera center must lie strictly inside the image");
}

std::pair<double, double> pixel_to_angles(const CameraModel& cam, double a, double b) {
  const double alpha = (cam.center_x - a) * cam.hfov_deg / cam.width;
  const double beta = (cam.center_y - b) * cam.vfov_deg / cam.height;
  return {alpha, beta};
}

Point3D reconstruct_3d(const CameraModel& cam, double a, double b, double depth_mm) {
  if (!(depth_mm > 0)) throw ValidationError("depth must be positive");
  const auto [alpha, beta] = pixel_to_angles(cam, a, b);
  const double ar = alpha * kDegToRad;
  const double br = beta * kDegToRad;
  const double d_cm = depth_mm / 10.0;
  return {-d_cm * std::sin(ar) * std::cos(br), d_cm * std::sin(br), d_cm};
}

PixelDepth project_to_pixel(const CameraModel& cam, const Point3D& p) {
  if (!(p.z() > 0)) throw ValidationError("point must have positive z");
  const double sy = p.y() / p.z();
  if (std::abs(sy) > 1.0)
    throw OutOfFrustumError("vertical ratio |y/z| exceeds 1");
  const double br = std::asin(sy);
  const double sx = -p.x() / (p.z() * std::cos(br));
  if (std::abs(sx) > 1.0)
    throw OutOfFrustumError("horizontal ratio exceeds 1");
  const double ar = std::asin(sx);

  const double alpha = ar * kRadToDeg;
  const double beta = br * kRadToDeg;
  if (std::abs(alpha) > cam.hfov_deg / 2 || std::abs(beta) > cam.vfov_deg / 2)
    throw OutOfFrustumError("aperture angle outside the field of view");

  PixelDepth out;
  out.a = cam.center_x - alpha * cam.width / cam.hfov_deg;
  out.b = cam.center_y - beta * cam.height / cam.vfov_deg;
  out.depth_mm = 10.0 * p.z();
  return out;
}

Offset2D estimate_offset(const std::vector<Detection2D>& rgb_detections,
                         const std::vector<Detection2D>& depth_detections) {
  if (rgb_detections.empty()) throw ValidationError("estimate_offset: empty detection lists");
  if (rgb_detections.size() != depth_detections.size())
    throw ValidationError("estimate_offset: detection counts differ (" +
                          std::to_string(rgb_detections.size()) + " rgb vs " +
                          std::to_string(depth_detections.size()) + " depth)");

  std::vector<int> claimed(depth_detections.size(), -1);
  double sum_dx = 0, sum_dy = 0;
  for (std::size_t i = 0; i < rgb_detections.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (std::size_t j = 0; j < depth_detections.size(); ++j) {
      const double d = std::hypot(depth_detections[j].x - rgb_detections[i].x,
                                  depth_detections[j].y - rgb_detections[i].y);
      if (d < best) {
        best = d;
        arg = static_cast<int>(j);
      }
    }
    if (claimed[arg] >= 0)
      throw ValidationError("estimate_offset: ambiguous pairing, rgb detections " +
                            std::to_string(claimed[arg]) + " and " + std::to_string(i) +
                            " share depth detection " + std::to_string(arg));
    claimed[arg] = static_cast<int>(i);
    sum_dx += depth_detections[arg].x - rgb_detections[i].x;
    sum_dy += depth_detections[arg].y - rgb_detections[i].y;
  }
  const double n = static_cast<double>(rgb_detections.size());
  return {sum_dx / n, sum_dy / n};
}

}  // namespace flexo
