#ifndef FLEXO_TRACK_HPP
#define FLEXO_TRACK_HPP

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "flexo/detect.hpp"
#include "flexo/frameio.hpp"
#include "flexo/registration.hpp"
#include "flexo/types.hpp"

namespace flexo {

/// Linear-Gaussian state-space model x_k = A x_{k-1} + w, z_k = H x_k + v,
/// with w ~ N(0, Q) and v ~ N(0, R).
struct KalmanModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd H;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
};

void validate(const KalmanModel& model);

struct TrackState {
  Eigen::VectorXd x_hat;
  Eigen::MatrixXd P;
  int frames_missed = 0;
  MarkerRole track_id = MarkerRole::MT1;
};

struct TrajectorySample {
  double t = 0;
  Point3D p = Point3D::Zero();
  bool filtered = true;  // false when the sample is a coasted prediction
};

struct Trajectory3D {
  MarkerRole role = MarkerRole::MT1;
  std::vector<TrajectorySample> samples;
};

struct TrackParams {
  double sigma_process = 50.0;  // px/s^2
  double sigma_meas = 1.0;      // px
  double gate_px = 20.0;
  int max_missed = 15;
};

/// Time update: x = A x, P = A P A' + Q (process noise enters through its
/// zero mean).
TrackState kf_predict(const KalmanModel& model, const TrackState& s);

/// Measurement update with gain K = P H' (H P H' + R)^-1; the posterior
/// covariance is re-symmetrized as (P + P') / 2. Throws
/// FilterDivergenceError when the innovation covariance is not positive
/// definite.
TrackState kf_update(const KalmanModel& model, const TrackState& s, const Eigen::VectorXd& z);

/// Per-axis constant-velocity model, state (position, velocity):
/// A = [[1, dt], [0, 1]], H = [1, 0],
/// Q = sigma_process^2 [[dt^4/4, dt^3/2], [dt^3/2, dt^2]], R = sigma_meas^2.
KalmanModel default_model(double fps, double sigma_process, double sigma_meas);

/// Block-diagonal replication of a model over independent axes.
KalmanModel stack_axes(const KalmanModel& axis_model, int axes);

struct PredictedTrack {
  MarkerRole track_id = MarkerRole::MT1;
  double x = 0;
  double y = 0;
  double gate = 0;  // px
};

struct Association {
  std::vector<std::pair<int, int>> matches;  // (prediction index, detection index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

/// One-to-one assignment minimizing the summed Euclidean distance over all
/// maximum-cardinality matchings of pairs within their gate (Hungarian
/// method on a padded square cost matrix).
Association associate(const std::vector<PredictedTrack>& predictions,
                      const std::vector<Detection2D>& detections);

/// Exact minimum-cost assignment for a square cost matrix; returns the
/// column chosen for each row. Exposed for the association tests.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost);

/// Pixel-space starting point of one track, from the static calibration.
struct MarkerInit {
  double x = 0;
  double y = 0;
  double depth_mm = 0;
};

/// Tracks the five markers through a motion bundle. Per frame: detect in
/// RGB, predict every track, assign detections within the gate, update
/// matched tracks and coast the rest (prediction only, filtered=false).
/// Depth is sampled at the offset-shifted track position on matched frames
/// and carried over while coasting; positions convert to centimeters via
/// reconstruct_3d. Throws TrackLostError after more than max_missed
/// consecutive misses.
std::vector<Trajectory3D> track_markers(const SessionBundle& bundle, const CameraModel& cam,
                                        const Offset2D& offset,
                                        const std::map<MarkerRole, MarkerInit>& initial,
                                        const TrackParams& tparams, const DetectParams& dparams);

}  // namespace flexo

#endif  // FLEXO_TRACK_HPP
