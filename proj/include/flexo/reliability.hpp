#ifndef FLEXO_RELIABILITY_HPP
#define FLEXO_RELIABILITY_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "flexo/kinematics.hpp"

namespace flexo {

/// Waveform compared across sessions.
enum class Quantity { Phi, Omega, XPos, YPos };

const char* to_string(Quantity q);

/// A session's waveform resampled onto the normalized movement cycle.
struct NormalizedWaveform {
  Eigen::VectorXd values;
  Quantity quantity = Quantity::Phi;
};

/// Linear interpolation of (t, v) onto n equally spaced points spanning
/// [t_first, t_last]. Requires n >= 2 and at least two samples.
NormalizedWaveform resample_cycle(const Eigen::VectorXd& t, const Eigen::VectorXd& v, int n,
                                  Quantity quantity);

/// Sample Pearson correlation coefficient. Throws ValidationError on
/// length mismatch or zero variance.
double pearson(const NormalizedWaveform& a, const NormalizedWaveform& b);

/// Test-retest standard error of measurement: the standard deviation of
/// the pointwise differences divided by sqrt(2).
double sem(const NormalizedWaveform& a, const NormalizedWaveform& b);

/// Kadaba coefficient of multiple correlation over M >= 2 sessions:
/// sqrt(1 - [sum (Y_jt - Ybar_t)^2 / (T(M-1))] / [sum (Y_jt - Ybar)^2 / (MT-1)]).
/// A negative radicand clamps to 0. Throws ValidationError when the grand
/// variance is zero.
double cmc(const std::vector<NormalizedWaveform>& sessions);

struct ReliabilityRow {
  int session_i = 0;  // 1-based, mirroring the table labels
  int session_j = 0;
  Quantity quantity = Quantity::Phi;
  double sem = 0;
  double cmc = 0;
  double pearson = 0;
};

struct ReliabilityReport {
  std::vector<std::string> session_ids;
  std::vector<ReliabilityRow> rows;  // quantity-major, pairs in index order
};

/// Input per session: the angle series plus the MA1-referenced sagittal
/// positions of MT1.
struct SessionWaveforms {
  std::string session_id;
  AngleSeries series;
  Eigen::VectorXd x_cm;
  Eigen::VectorXd y_cm;
};

/// Pairwise SEM / CMC / Pearson for phi, omega and the x/y positions, one
/// row per unordered session pair per quantity.
ReliabilityReport reliability_report(const std::vector<SessionWaveforms>& sessions, int n_norm);

}  // namespace flexo

#endif  // FLEXO_RELIABILITY_HPP
