#include "flexo/track.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace flexo {

namespace {
// Cost-matrix padding for the gated assignment. Leaving an element
// unmatched costs kUnmatched; a gated-out pairing costs kForbidden, large
// enough that the solver always prefers two dummy assignments instead.
constexpr double kUnmatched = 1e6;
constexpr double kForbidden = 1e12;

constexpr double kInitVelStd = 100.0;  // px/s, loose prior on unseen velocity
}  // namespace

void validate(const KalmanModel& model) {
  const auto n = model.A.rows();
  const auto m = model.H.rows();
  if (model.A.cols() != n) throw ValidationError("A must be square");
  if (model.H.cols() != n) throw ValidationError("H column count must match state size");
  if (model.Q.rows() != n || model.Q.cols() != n)
    throw ValidationError("Q must be n x n");
  if (model.R.rows() != m || model.R.cols() != m)
    throw ValidationError("R must be m x m");
  if (!model.Q.isApprox(model.Q.transpose(), 1e-12))
    throw ValidationError("Q must be symmetric");
  if (!model.R.isApprox(model.R.transpose(), 1e-12))
    throw ValidationError("R must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qe(model.Q);
  if (qe.eigenvalues().minCoeff() < -1e-9)
    throw ValidationError("Q must be positive semidefinite");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> re(model.R);
  if (re.eigenvalues().minCoeff() <= 0)
    throw ValidationError("R must be positive definite");
}

TrackState kf_predict(const KalmanModel& model, const TrackState& s) {
  TrackState out = s;
  out.x_hat = model.A * s.x_hat;
  out.P = model.A * s.P * model.A.transpose() + model.Q;
  return out;
}

TrackState kf_update(const KalmanModel& model, const TrackState& s, const Eigen::VectorXd& z) {
  const Eigen::MatrixXd S = model.H * s.P * model.H.transpose() + model.R;
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw FilterDivergenceError("innovation covariance is not positive definite");
  // K = P H' S^-1, computed as the solution of S K' = H P.
  const Eigen::MatrixXd K = llt.solve(model.H * s.P).transpose();

  TrackState out = s;
  out.x_hat = s.x_hat + K * (z - model.H * s.x_hat);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(s.P.rows(), s.P.cols());
  out.P = (I - K * model.H) * s.P;
  out.P = ((out.P + out.P.transpose()) / 2.0).eval();
  return out;
}

KalmanModel default_model(double fps, double sigma_process, double sigma_meas) {
  if (!(fps > 0)) throw ValidationError("fps must be positive");
  const double dt = 1.0 / fps;
  KalmanModel m;
  m.A = Eigen::MatrixXd{{1.0, dt}, {0.0, 1.0}};
  m.H = Eigen::MatrixXd{{1.0, 0.0}};
  const double q = sigma_process * sigma_process;
  m.Q = q * Eigen::MatrixXd{{dt * dt * dt * dt / 4.0, dt * dt * dt / 2.0},
                            {dt * dt * dt / 2.0, dt * dt}};
  m.R = Eigen::MatrixXd{{sigma_meas * sigma_meas}};
  return m;
}

KalmanModel stack_axes(const KalmanModel& axis_model, int axes) {
  const auto n = axis_model.A.rows();
  const auto m = axis_model.H.rows();
  KalmanModel out;
  out.A = Eigen::MatrixXd::Zero(n * axes, n * axes);
  out.Q = Eigen::MatrixXd::Zero(n * axes, n * axes);
  out.H = Eigen::MatrixXd::Zero(m * axes, n * axes);
  out.R = Eigen::MatrixXd::Zero(m * axes, m * axes);
  for (int a = 0; a < axes; ++a) {
    out.A.block(a * n, a * n, n, n) = axis_model.A;
    out.Q.block(a * n, a * n, n, n) = axis_model.Q;
    out.H.block(a * m, a * n, m, n) = axis_model.H;
    out.R.block(a * m, a * m, m, m) = axis_model.R;
  }
  return out;
}

std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != n)
      throw ValidationError("assignment cost matrix must be square");

  // Hungarian method with potentials, O(n^3). Internally 1-indexed;
  // p[j] holds the row assigned to column j.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

Association associate(const std::vector<PredictedTrack>& predictions,
                      const std::vector<Detection2D>& detections) {
  for (const PredictedTrack& p : predictions)
    if (!(p.gate > 0)) throw ValidationError("association gate must be positive");

  const int nt = static_cast<int>(predictions.size());
  const int nd = static_cast<int>(detections.size());
  Association out;
  if (nt == 0 || nd == 0) {
    for (int i = 0; i < nt; ++i) out.unmatched_tracks.push_back(i);
    for (int j = 0; j < nd; ++j) out.unmatched_detections.push_back(j);
    return out;
  }

  const int n = nt + nd;
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < nd; ++j) {
      const double d = std::hypot(detections[j].x - predictions[i].x,
                                  detections[j].y - predictions[i].y);
      cost[i][j] = d <= predictions[i].gate ? d : kForbidden;
    }
    for (int j = nd; j < n; ++j) cost[i][j] = kUnmatched;
  }
  for (int i = nt; i < n; ++i)
    for (int j = 0; j < nd; ++j) cost[i][j] = kUnmatched;

  const std::vector<int> row_to_col = solve_assignment(cost);
  std::vector<char> det_matched(nd, 0);
  for (int i = 0; i < nt; ++i) {
    const int j = row_to_col[i];
    if (j >= 0 && j < nd && cost[i][j] < kUnmatched) {
      out.matches.emplace_back(i, j);
      det_matched[j] = 1;
    } else {
      out.unmatched_tracks.push_back(i);
    }
  }
  for (int j = 0; j < nd; ++j)
    if (!det_matched[j]) out.unmatched_detections.push_back(j);
  return out;
}

std::vector<Trajectory3D> track_markers(const SessionBundle& bundle, const CameraModel& cam,
                                        const Offset2D& offset,
                                        const std::map<MarkerRole, MarkerInit>& initial,
                                        const TrackParams& tparams, const DetectParams& dparams) {
  validate(bundle);
  for (MarkerRole role : kAllRoles)
    if (!initial.count(role)) throw MissingRoleError(role);

  const double fps = bundle.manifest.fps;
  const KalmanModel model = stack_axes(default_model(fps, tparams.sigma_process, tparams.sigma_meas), 2);

  struct Track {
    TrackState state;
    double depth_mm = 0;  // last valid depth sample
  };
  std::vector<Track> tracks;
  std::vector<Trajectory3D> trajectories;
  for (MarkerRole role : kAllRoles) {
    const MarkerInit& init = initial.at(role);
    if (!(init.depth_mm > 0))
      throw ValidationError(std::string("initial depth for ") + to_string(role) +
                            " must be positive");
    Track tr;
    tr.state.track_id = role;
    tr.state.x_hat = Eigen::Vector4d(init.x, 0.0, init.y, 0.0);
    tr.state.P = Eigen::Vector4d(tparams.sigma_meas * tparams.sigma_meas, kInitVelStd * kInitVelStd,
                                 tparams.sigma_meas * tparams.sigma_meas, kInitVelStd * kInitVelStd)
                     .asDiagonal();
    tr.depth_mm = init.depth_mm;
    tracks.push_back(std::move(tr));
    trajectories.push_back({role, {}});
    trajectories.back().samples.reserve(bundle.manifest.frame_count);
  }

  for (int f = 0; f < bundle.manifest.frame_count; ++f) {
    const std::vector<Detection2D> detections = detect_markers(bundle.rgb[f], dparams, f);

    std::vector<PredictedTrack> predictions;
    std::vector<TrackState> predicted;
    predictions.reserve(tracks.size());
    for (const Track& tr : tracks) {
      TrackState pre = kf_predict(model, tr.state);
      predictions.push_back({tr.state.track_id, pre.x_hat(0), pre.x_hat(2), tparams.gate_px});
      predicted.push_back(std::move(pre));
    }

    const Association assoc = associate(predictions, detections);
    std::vector<int> match_of(tracks.size(), -1);
    for (const auto& [ti, di] : assoc.matches) match_of[ti] = di;

    for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
      Track& tr = tracks[ti];
      bool measured = false;
      if (match_of[ti] >= 0) {
        const Detection2D& det = detections[match_of[ti]];
        tr.state = kf_update(model, predicted[ti], Eigen::Vector2d(det.x, det.y));
        tr.state.frames_missed = 0;
        measured = true;
      } else {
        tr.state = predicted[ti];
        tr.state.frames_missed++;
        if (tr.state.frames_missed > tparams.max_missed)
          throw TrackLostError(tr.state.track_id, f);
      }

      const double px = tr.state.x_hat(0);
      const double py = tr.state.x_hat(2);
      if (measured) {
        try {
          tr.depth_mm = sample_depth(bundle.depth[f], px + offset.dx, py + offset.dy,
                                     dparams.depth_window);
        } catch (const NoDepthError&) {
          // keep the previous depth; the sensor read nothing here
        }
      }
      trajectories[ti].samples.push_back(
          {bundle.timestamp(f), reconstruct_3d(cam, px, py, tr.depth_mm), measured});
    }
  }
  return trajectories;
}

}  // namespace flexo
