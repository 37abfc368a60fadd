#ifndef FLEXO_REGISTRATION_HPP
#define FLEXO_REGISTRATION_HPP

#include <utility>
#include <vector>

#include "flexo/detect.hpp"
#include "flexo/error.hpp"
#include "flexo/types.hpp"

namespace flexo {

/// Field-of-view camera model. Angles map linearly to pixels around the
/// optical center, with both angles growing toward the image origin.
struct CameraModel {
  int width = 640;
  int height = 480;
  double hfov_deg = 57.0;
  double vfov_deg = 43.0;
  double center_x = 320.0;  // a0
  double center_y = 240.0;  // b0
};

void validate(const CameraModel& cam);

/// Constant translation taking an RGB pixel to the matching depth pixel.
struct Offset2D {
  double dx = 0.0;
  double dy = 0.0;
};

/// Aperture angles (alpha, beta) in degrees for a pixel position:
/// alpha = (a0 - a) * hfov / width, beta = (b0 - b) * vfov / height.
std::pair<double, double> pixel_to_angles(const CameraModel& cam, double a, double b);

/// Pixel position plus depth (mm) to camera-frame centimeters. With
/// D = depth/10 cm: x = -D sin(alpha) cos(beta), y = D sin(beta), z = D.
/// D here is the axial depth reading, applied exactly as stated; the
/// inverse below is derived from the same equations so the pair is
/// self-consistent. Throws ValidationError for depth <= 0.
Point3D reconstruct_3d(const CameraModel& cam, double a, double b, double depth_mm);

struct PixelDepth {
  double a = 0.0;
  double b = 0.0;
  double depth_mm = 0.0;
};

/// Exact inverse of reconstruct_3d: beta = asin(y/z),
/// alpha = -asin(x / (z cos(beta))), pixels from the angle map, depth = 10 z.
/// Throws OutOfFrustumError when either angle exceeds its half field of
/// view (including asin-domain violations such as |y| > z).
PixelDepth project_to_pixel(const CameraModel& cam, const Point3D& p);

/// Mean (depth - rgb) centroid displacement over nearest-neighbor pairs
/// from a static trial. Throws ValidationError on empty or mismatched
/// inputs and on ambiguous pairings (two RGB detections claiming the same
/// depth detection).
Offset2D estimate_offset(const std::vector<Detection2D>& rgb_detections,
                         const std::vector<Detection2D>& depth_detections);

}  // namespace flexo

#endif  // FLEXO_REGISTRATION_HPP
