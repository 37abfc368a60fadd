#ifndef FLEXO_TYPES_HPP
#define FLEXO_TYPES_HPP

#include <array>
#include <string>

#include <Eigen/Core>

namespace flexo {

/// 3D point in the camera frame, centimeters. y points up, x is lateral
/// (positive to the right of the image center), z is the axial range.
using Point3D = Eigen::Vector3d;

/// Marker roles of the five-marker protocol: three technical markers on the
/// headband rig, one anatomical marker on the earlobe, one chair reference.
enum class MarkerRole { MT1, MT2, MT3, MA1, MS1 };

inline constexpr std::array<MarkerRole, 5> kAllRoles = {
    MarkerRole::MT1, MarkerRole::MT2, MarkerRole::MT3,
    MarkerRole::MA1, MarkerRole::MS1};

inline const char* to_string(MarkerRole role) {
  switch (role) {
    case MarkerRole::MT1: return "MT1";
    case MarkerRole::MT2: return "MT2";
    case MarkerRole::MT3: return "MT3";
    case MarkerRole::MA1: return "MA1";
    case MarkerRole::MS1: return "MS1";
  }
  return "?";
}

MarkerRole role_from_string(const std::string& name);

}  // namespace flexo

#endif  // FLEXO_TYPES_HPP
