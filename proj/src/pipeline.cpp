#include "flexo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

namespace flexo {

using json = nlohmann::ordered_json;

namespace {

void write_file_atomic(const std::filesystem::path& file, const std::string& content) {
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "file", "cannot open for writing");
    out << content;
    if (!out) throw IoError(tmp.string(), "file", "write failed");
  }
  std::filesystem::rename(tmp, file);
}

json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError(file.string(), "file", "cannot open for reading");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(file.string(), "json", e.what());
  }
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

const json& expect(const json& doc, const char* key, const std::filesystem::path& file) {
  if (!doc.contains(key)) throw IoError(file.string(), key, "missing key");
  return doc.at(key);
}

}  // namespace

std::map<MarkerRole, Detection2D> assign_roles(const std::vector<Detection2D>& detections,
                                               int image_height) {
  std::vector<Detection2D> sorted = detections;
  std::sort(sorted.begin(), sorted.end(), [](const Detection2D& a, const Detection2D& b) {
    return std::tie(a.y, a.x) < std::tie(b.y, b.x);
  });

  if (sorted.size() < 3) throw MissingRoleError(MarkerRole::MT1);

  // Headband markers sit highest in the image; order them left to right.
  std::vector<Detection2D> technical(sorted.begin(), sorted.begin() + 3);
  std::sort(technical.begin(), technical.end(),
            [](const Detection2D& a, const Detection2D& b) { return a.x < b.x; });

  std::map<MarkerRole, Detection2D> roles;
  roles[MarkerRole::MT1] = technical[0];
  roles[MarkerRole::MT2] = technical[1];
  roles[MarkerRole::MT3] = technical[2];

  if (sorted.size() >= 5) {
    roles[MarkerRole::MA1] = sorted[3];
    roles[MarkerRole::MS1] = sorted[4];
    return roles;
  }
  if (sorted.size() == 4) {
    // One of the two lower markers is gone. The earlobe marker sits close
    // under the headband; the chair marker sits near the bottom.
    const double mt_mean_y = (technical[0].y + technical[1].y + technical[2].y) / 3.0;
    const Detection2D& leftover = sorted[3];
    if (leftover.y < (mt_mean_y + image_height) / 2.0) throw MissingRoleError(MarkerRole::MS1);
    throw MissingRoleError(MarkerRole::MA1);
  }
  throw MissingRoleError(MarkerRole::MA1);
}

Calibration calibrate_session(const SessionBundle& bundle, const Config& config) {
  validate(bundle);
  if (bundle.manifest.trial_kind != TrialKind::Static)
    throw ValidationError("calibration requires a static-trial bundle");
  if (bundle.manifest.width != config.camera.width ||
      bundle.manifest.height != config.camera.height)
    throw ValidationError("camera model does not match the bundle dimensions");

  const int n_frames = bundle.manifest.frame_count;
  std::vector<std::vector<Detection2D>> rgb_dets(n_frames);
  int best_frame = 0;
  for (int f = 0; f < n_frames; ++f) {
    rgb_dets[f] = detect_markers(bundle.rgb[f], config.detect, f);
    if (rgb_dets[f].size() > rgb_dets[best_frame].size()) best_frame = f;
  }
  if (rgb_dets[best_frame].size() < 5)
    assign_roles(rgb_dets[best_frame], config.camera.height);  // throws, naming the role

  // RGB-to-depth displacement, averaged over every frame where both
  // streams see all five markers unambiguously.
  double sum_dx = 0, sum_dy = 0;
  int n_offset = 0;
  for (int f = 0; f < n_frames; ++f) {
    if (rgb_dets[f].size() != 5) continue;
    const std::vector<Detection2D> depth_dets = detect_markers(bundle.depth[f], config.detect, f);
    if (depth_dets.size() != 5) continue;
    try {
      const Offset2D o = estimate_offset(rgb_dets[f], depth_dets);
      sum_dx += o.dx;
      sum_dy += o.dy;
      n_offset++;
    } catch (const ValidationError&) {
      // ambiguous pairing on this frame; skip it
    }
  }
  if (n_offset == 0)
    throw ValidationError("no static frame yields a usable RGB/depth marker pairing");
  const Offset2D offset{sum_dx / n_offset, sum_dy / n_offset};

  // Static trajectories for the reference frame, plus per-role pixel and
  // depth means seeding the tracker.
  std::vector<Trajectory3D> statics;
  for (MarkerRole role : kAllRoles) statics.push_back({role, {}});
  std::map<MarkerRole, double> sx, sy, sd;
  int n_good = 0;
  for (int f = 0; f < n_frames; ++f) {
    if (rgb_dets[f].size() != 5) continue;
    const auto roles = assign_roles(rgb_dets[f], config.camera.height);
    std::map<MarkerRole, std::pair<Point3D, double>> frame_points;
    try {
      for (const auto& [role, det] : roles) {
        const double depth_mm = sample_depth(bundle.depth[f], det.x + offset.dx,
                                             det.y + offset.dy, config.detect.depth_window);
        frame_points[role] = {reconstruct_3d(config.camera, det.x, det.y, depth_mm), depth_mm};
      }
    } catch (const NoDepthError&) {
      continue;  // drop the whole frame to keep the role series aligned
    }
    for (std::size_t r = 0; r < kAllRoles.size(); ++r) {
      const MarkerRole role = kAllRoles[r];
      statics[r].samples.push_back({bundle.timestamp(f), frame_points[role].first, true});
      sx[role] += roles.at(role).x;
      sy[role] += roles.at(role).y;
      sd[role] += frame_points[role].second;
    }
    n_good++;
  }
  if (n_good == 0) throw ValidationError("no static frame has all five markers with depth");

  Calibration calibration;
  calibration.offset = offset;
  calibration.reference = build_reference(statics);
  for (MarkerRole role : kAllRoles)
    calibration.markers[role] = {sx[role] / n_good, sy[role] / n_good, sd[role] / n_good};
  calibration.subject_id = bundle.manifest.subject_id;
  return calibration;
}

void save_calibration(const Calibration& calibration, const std::filesystem::path& file) {
  json doc;
  doc["subject_id"] = calibration.subject_id;
  doc["offset"] = {{"dx_px", calibration.offset.dx}, {"dy_px", calibration.offset.dy}};
  doc["reference"] = {
      {"origin_cm", {calibration.reference.origin.x(), calibration.reference.origin.y(),
                     calibration.reference.origin.z()}},
      {"u_forward", {calibration.reference.u_forward.x(), calibration.reference.u_forward.y(),
                     calibration.reference.u_forward.z()}},
      {"u_up", {calibration.reference.u_up.x(), calibration.reference.u_up.y(),
                calibration.reference.u_up.z()}},
      {"phi0_deg", calibration.reference.phi0_deg}};
  json markers;
  for (const auto& [role, init] : calibration.markers)
    markers[to_string(role)] = {{"x_px", init.x}, {"y_px", init.y}, {"depth_mm", init.depth_mm}};
  doc["markers"] = markers;
  write_file_atomic(file, doc.dump(2) + "\n");
}

Calibration load_calibration(const std::filesystem::path& file) {
  const json doc = read_json(file);
  Calibration c;
  try {
    c.subject_id = expect(doc, "subject_id", file).get<std::string>();
    const json& off = expect(doc, "offset", file);
    c.offset.dx = expect(off, "dx_px", file).get<double>();
    c.offset.dy = expect(off, "dy_px", file).get<double>();
    const json& ref = expect(doc, "reference", file);
    const auto origin = expect(ref, "origin_cm", file).get<std::vector<double>>();
    const auto fwd = expect(ref, "u_forward", file).get<std::vector<double>>();
    const auto up = expect(ref, "u_up", file).get<std::vector<double>>();
    if (origin.size() != 3 || fwd.size() != 3 || up.size() != 3)
      throw IoError(file.string(), "reference", "vectors must have 3 components");
    c.reference.origin = Point3D(origin[0], origin[1], origin[2]);
    c.reference.u_forward = Eigen::Vector3d(fwd[0], fwd[1], fwd[2]);
    c.reference.u_up = Eigen::Vector3d(up[0], up[1], up[2]);
    c.reference.phi0_deg = expect(ref, "phi0_deg", file).get<double>();
    const json& markers = expect(doc, "markers", file);
    for (MarkerRole role : kAllRoles) {
      const json& m = expect(markers, to_string(role), file);
      c.markers[role] = {expect(m, "x_px", file).get<double>(),
                         expect(m, "y_px", file).get<double>(),
                         expect(m, "depth_mm", file).get<double>()};
    }
  } catch (const json::exception& e) {
    throw IoError(file.string(), "calibration", e.what());
  }
  return c;
}

SessionRecord analyze_bundle(const SessionBundle& bundle, const Calibration& calibration,
                             const Config& config) {
  validate(bundle);
  if (bundle.manifest.width != config.camera.width ||
      bundle.manifest.height != config.camera.height)
    throw ValidationError("camera model does not match the bundle dimensions");

  const std::vector<Trajectory3D> trajectories =
      track_markers(bundle, config.camera, calibration.offset, calibration.markers,
                    config.track, config.detect);

  SessionRecord record;
  record.subject_id = bundle.manifest.subject_id;
  record.session_id = bundle.manifest.session_id;
  record.report = analyze_session(trajectories, calibration.reference, config.kinematics);

  const Trajectory3D* mt1 = nullptr;
  for (const Trajectory3D& tr : trajectories)
    if (tr.role == MarkerRole::MT1) mt1 = &tr;
  const int n = static_cast<int>(mt1->samples.size());
  Eigen::VectorXd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    const Point3D d = mt1->samples[i].p - calibration.reference.origin;
    x(i) = d.dot(calibration.reference.u_forward);
    y(i) = d.dot(calibration.reference.u_up);
  }
  record.x_cm = smooth(x, config.kinematics.smooth_window, config.kinematics.smooth_order);
  record.y_cm = smooth(y, config.kinematics.smooth_window, config.kinematics.smooth_order);
  return record;
}

void save_record(const SessionRecord& record, const std::filesystem::path& json_file) {
  json doc;
  doc["subject_id"] = record.subject_id;
  doc["session_id"] = record.session_id;
  doc["report"] = {{"max_angle_deg", record.report.max_angle_deg},
                   {"rom_deg", record.report.rom_deg},
                   {"mean_omega_deg_s", record.report.mean_omega_deg_s},
                   {"harmony", record.report.harmony},
                   {"chair_ok", record.report.chair_ok}};
  doc["series"] = {{"t_s", to_std(record.report.series.t)},
                   {"phi_deg", to_std(record.report.series.phi)},
                   {"omega_deg_s", to_std(record.report.series.omega)},
                   {"omega_dot_deg_s2", to_std(record.report.series.omega_dot)}};
  doc["positions"] = {{"x_cm", to_std(record.x_cm)}, {"y_cm", to_std(record.y_cm)}};
  write_file_atomic(json_file, doc.dump(2) + "\n");
}

SessionRecord load_record(const std::filesystem::path& file) {
  const json doc = read_json(file);
  SessionRecord r;
  try {
    r.subject_id = expect(doc, "subject_id", file).get<std::string>();
    r.session_id = expect(doc, "session_id", file).get<std::string>();
    const json& rep = expect(doc, "report", file);
    r.report.max_angle_deg = expect(rep, "max_angle_deg", file).get<double>();
    r.report.rom_deg = expect(rep, "rom_deg", file).get<double>();
    r.report.mean_omega_deg_s = expect(rep, "mean_omega_deg_s", file).get<double>();
    r.report.harmony = expect(rep, "harmony", file).get<double>();
    r.report.chair_ok = expect(rep, "chair_ok", file).get<bool>();
    const json& series = expect(doc, "series", file);
    r.report.series.t = to_eigen(expect(series, "t_s", file).get<std::vector<double>>());
    r.report.series.phi = to_eigen(expect(series, "phi_deg", file).get<std::vector<double>>());
    r.report.series.omega =
        to_eigen(expect(series, "omega_deg_s", file).get<std::vector<double>>());
    r.report.series.omega_dot =
        to_eigen(expect(series, "omega_dot_deg_s2", file).get<std::vector<double>>());
    const json& pos = expect(doc, "positions", file);
    r.x_cm = to_eigen(expect(pos, "x_cm", file).get<std::vector<double>>());
    r.y_cm = to_eigen(expect(pos, "y_cm", file).get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw IoError(file.string(), "record", e.what());
  }
  return r;
}

std::string record_csv(const SessionRecord& record) {
  const AngleSeries& s = record.report.series;
  std::string out = "t_s,phi_deg,omega_deg_s,omega_dot_deg_s2\n";
  char line[160];
  for (Eigen::Index i = 0; i < s.t.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g,%.10g\n", s.t(i), s.phi(i), s.omega(i),
                  s.omega_dot(i));
    out += line;
  }
  return out;
}

std::string reliability_table(const ReliabilityReport& report) {
  std::string out;
  char line[160];
  const Quantity quantities[] = {Quantity::Phi, Quantity::Omega, Quantity::XPos, Quantity::YPos};
  for (Quantity q : quantities) {
    out += std::string("Correlation of ") + to_string(q) + "\n";
    std::snprintf(line, sizeof(line), "%-18s %8s %8s %8s\n", "Variable", "SEM", "CMC", "Pearson");
    out += line;
    for (const ReliabilityRow& row : report.rows) {
      if (row.quantity != q) continue;
      std::snprintf(line, sizeof(line), "Sessions %d & %d     %8.2f %8.3f %8.3f\n", row.session_i,
                    row.session_j, row.sem, row.cmc, row.pearson);
      out += line;
    }
    out += "\n";
  }
  return out;
}

namespace {

json truth_to_json(const GroundTruth& truth, const Config& config, std::uint64_t seed,
                   TrialKind kind) {
  json doc;
  doc["subject_id"] = config.synth.subject_id;
  doc["session_id"] = config.synth.session_id;
  doc["trial_kind"] = to_string(kind);
  doc["seed"] = seed;
  doc["report"] = {{"max_angle_deg", truth.report_exact.max_angle_deg},
                   {"rom_deg", truth.report_exact.rom_deg},
                   {"mean_omega_deg_s", truth.report_exact.mean_omega_deg_s},
                   {"harmony", truth.report_exact.harmony}};
  doc["series"] = {{"t_s", to_std(truth.phi_exact.t)},
                   {"phi_deg", to_std(truth.phi_exact.phi)},
                   {"omega_deg_s", to_std(truth.phi_exact.omega)},
                   {"omega_dot_deg_s2", to_std(truth.phi_exact.omega_dot)}};
  json trajectories;
  for (const Trajectory3D& tr : truth.trajectories) {
    json samples = json::array();
    for (const TrajectorySample& s : tr.samples)
      samples.push_back({s.p.x(), s.p.y(), s.p.z()});
    trajectories[to_string(tr.role)] = std::move(samples);
  }
  doc["trajectories_cm"] = std::move(trajectories);
  return doc;
}

}  // namespace

int cmd_synthesize(const Config& config, const std::filesystem::path& out_dir,
                   std::optional<std::uint64_t> seed_override) {
  try {
    MotionProfile profile = config.synth.profile;
    const TrialKind kind = config.synth.trial_kind;
    if (kind == TrialKind::Static) {
      // Hold the rest pose: a vanishing amplitude over static_seconds.
      profile.amplitude_deg = 1e-3;
      profile.period_s = 1.0;
      profile.n_cycles = config.synth.static_seconds;
    }
    if (seed_override) profile.seed = *seed_override;

    const GroundTruth truth = generate_motion(profile);
    const SessionBundle bundle =
        render_session(truth, config.camera, config.offset, profile.noise, profile.seed,
                       config.synth.subject_id, config.synth.session_id, kind);
    write_session(bundle, out_dir);
    write_file_atomic(out_dir / "truth.json",
                      truth_to_json(truth, config, profile.seed, kind).dump(2) + "\n");
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_calibrate(const std::filesystem::path& bundle_dir, const Config& config,
                  const std::filesystem::path& out_dir) {
  try {
    const SessionBundle bundle = read_session(bundle_dir);
    const Calibration calibration = calibrate_session(bundle, config);
    std::filesystem::create_directories(out_dir);
    save_calibration(calibration, out_dir / "calibration.json");
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int cmd_analyze(const std::filesystem::path& bundle_dir,
                const std::filesystem::path& calibration_file, const Config& config,
                const std::filesystem::path& out_dir) {
  SessionRecord record;
  try {
    const SessionBundle bundle = read_session(bundle_dir);
    const Calibration calibration = load_calibration(calibration_file);
    record = analyze_bundle(bundle, calibration, config);
  } catch (const TrackLostError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    std::filesystem::create_directories(out_dir);
    save_record(record, out_dir / "report.json");
    write_file_atomic(out_dir / "series.csv", record_csv(record));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  if (!record.report.chair_ok) {
    std::cerr << "warning: chair reference marker moved during the session\n";
    return 3;
  }
  return 0;
}

int cmd_reliability(const std::vector<std::filesystem::path>& record_files, const Config& config,
                    const std::filesystem::path& out_dir) {
  try {
    if (record_files.size() < 2) {
      std::cerr << "error: reliability needs at least two session reports\n";
      return 2;
    }
    std::vector<SessionRecord> records;
    for (const auto& file : record_files) records.push_back(load_record(file));
    for (const SessionRecord& r : records) {
      if (r.subject_id != records.front().subject_id) {
        std::cerr << "error: reports mix subjects '" << records.front().subject_id << "' and '"
                  << r.subject_id << "'\n";
        return 2;
      }
    }

    std::vector<SessionWaveforms> sessions;
    for (const SessionRecord& r : records)
      sessions.push_back({r.session_id, r.report.series, r.x_cm, r.y_cm});
    const ReliabilityReport report =
        reliability_report(sessions, config.normalization_points);

    json doc;
    doc["subject_id"] = records.front().subject_id;
    doc["session_ids"] = report.session_ids;
    json rows = json::array();
    for (const ReliabilityRow& row : report.rows)
      rows.push_back({{"quantity", to_string(row.quantity)},
                      {"session_i", row.session_i},
                      {"session_j", row.session_j},
                      {"sem", row.sem},
                      {"cmc", row.cmc},
                      {"pearson", row.pearson}});
    doc["rows"] = std::move(rows);

    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / "reliability.json", doc.dump(2) + "\n");
    write_file_atomic(out_dir / "reliability.txt", reliability_table(report));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace flexo
