#include "flexo/reliability.hpp"

#include <algorithm>
#include <cmath>

namespace flexo {

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::Phi: return "phi";
    case Quantity::Omega: return "omega";
    case Quantity::XPos: return "x";
    case Quantity::YPos: return "y";
  }
  return "?";
}

NormalizedWaveform resample_cycle(const Eigen::VectorXd& t, const Eigen::VectorXd& v, int n,
                                  Quantity quantity) {
  if (t.size() != v.size()) throw ValidationError("resample_cycle: t/v length mismatch");
  if (t.size() < 2) throw ValidationError("resample_cycle: need at least 2 samples");
  if (n < 2) throw ValidationError("resample_cycle: need at least 2 output points");
  for (Eigen::Index i = 1; i < t.size(); ++i)
    if (!(t(i) > t(i - 1))) throw ValidationError("resample_cycle: t must be strictly increasing");

  NormalizedWaveform out;
  out.quantity = quantity;
  out.values.resize(n);
  const double t0 = t(0);
  const double t1 = t(t.size() - 1);
  Eigen::Index k = 0;
  for (int j = 0; j < n; ++j) {
    const double u = t0 + (t1 - t0) * j / (n - 1);
    while (k + 2 < t.size() && t(k + 1) <= u) ++k;
    const double w = (u - t(k)) / (t(k + 1) - t(k));
    out.values(j) = v(k) + w * (v(k + 1) - v(k));
  }
  return out;
}

double pearson(const NormalizedWaveform& a, const NormalizedWaveform& b) {
  if (a.values.size() != b.values.size())
    throw ValidationError("pearson: length mismatch");
  if (a.values.size() < 2) throw ValidationError("pearson: need at least 2 points");
  const Eigen::VectorXd da = a.values.array() - a.values.mean();
  const Eigen::VectorXd db = b.values.array() - b.values.mean();
  const double na = da.norm();
  const double nb = db.norm();
  if (na <= 0 || nb <= 0) throw ValidationError("pearson: zero variance input");
  return da.dot(db) / (na * nb);
}

double sem(const NormalizedWaveform& a, const NormalizedWaveform& b) {
  if (a.values.size() != b.values.size()) throw ValidationError("sem: length mismatch");
  const Eigen::Index n = a.values.size();
  if (n < 2) throw ValidationError("sem: need at least 2 points");
  const Eigen::VectorXd d = a.values - b.values;
  const double sd = std::sqrt((d.array() - d.mean()).square().sum() / (n - 1));
  return sd / std::sqrt(2.0);
}

double cmc(const std::vector<NormalizedWaveform>& sessions) {
  const int m = static_cast<int>(sessions.size());
  if (m < 2) throw ValidationError("cmc: need at least 2 sessions");
  const Eigen::Index t = sessions[0].values.size();
  for (const NormalizedWaveform& w : sessions)
    if (w.values.size() != t) throw ValidationError("cmc: length mismatch");

  Eigen::VectorXd time_mean = Eigen::VectorXd::Zero(t);
  for (const NormalizedWaveform& w : sessions) time_mean += w.values;
  time_mean /= m;
  const double grand_mean = time_mean.mean();

  double within = 0;  // around the per-time mean
  double total = 0;   // around the grand mean
  for (const NormalizedWaveform& w : sessions) {
    within += (w.values - time_mean).squaredNorm();
    total += (w.values.array() - grand_mean).matrix().squaredNorm();
  }
  const double den = total / (static_cast<double>(m) * t - 1);
  if (den <= 0) throw ValidationError("cmc: zero grand variance");
  const double num = within / (static_cast<double>(t) * (m - 1));
  return std::sqrt(std::max(0.0, 1.0 - num / den));
}

ReliabilityReport reliability_report(const std::vector<SessionWaveforms>& sessions, int n_norm) {
  if (sessions.size() < 2) throw ValidationError("reliability needs at least 2 sessions");

  ReliabilityReport report;
  for (const SessionWaveforms& s : sessions) report.session_ids.push_back(s.session_id);

  const Quantity quantities[] = {Quantity::Phi, Quantity::Omega, Quantity::XPos, Quantity::YPos};
  for (Quantity q : quantities) {
    std::vector<NormalizedWaveform> waves;
    for (const SessionWaveforms& s : sessions) {
      const Eigen::VectorXd* v = nullptr;
      switch (q) {
        case Quantity::Phi: v = &s.series.phi; break;
        case Quantity::Omega: v = &s.series.omega; break;
        case Quantity::XPos: v = &s.x_cm; break;
        case Quantity::YPos: v = &s.y_cm; break;
      }
      waves.push_back(resample_cycle(s.series.t, *v, n_norm, q));
    }
    for (std::size_t i = 0; i < waves.size(); ++i) {
      for (std::size_t j = i + 1; j < waves.size(); ++j) {
        ReliabilityRow row;
        row.session_i = static_cast<int>(i) + 1;
        row.session_j = static_cast<int>(j) + 1;
        row.quantity = q;
        row.sem = sem(waves[i], waves[j]);
        row.cmc = cmc({waves[i], waves[j]});
        row.pearson = pearson(waves[i], waves[j]);
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

}  // namespace flexo
