#include "flexo/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace flexo {

using json = nlohmann::ordered_json;

Config default_config() {
  Config c;
  // The shipped defaults target the synthetic scenes this toolkit renders:
  // one marker depth band in front of the background wall, so two Otsu
  // levels with layer 1 kept. Rich real scenes want the 11-layer split
  // with layers 6-9 kept (the DetectParams{} defaults).
  c.detect.n_levels = 2;
  c.detect.kept_layers = {1};
  c.offset = {4.0, -2.0};
  c.synth.profile.noise = {1.0, 5.0, 0.02};
  c.synth.profile.seed = 7;
  return c;
}

namespace {

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ValidationError("config: '" + path + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key))
      throw ValidationError("config: unknown key '" + path + (path.empty() ? "" : ".") + key + "'");
}

template <typename T>
void fetch(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config: bad value for '" + path + "." + key + "'");
  }
}

void parse_camera(const json& obj, CameraModel& cam) {
  check_keys(obj, "camera", {"width", "height", "hfov_deg", "vfov_deg", "center_px"});
  fetch(obj, "camera", "width", cam.width);
  fetch(obj, "camera", "height", cam.height);
  fetch(obj, "camera", "hfov_deg", cam.hfov_deg);
  fetch(obj, "camera", "vfov_deg", cam.vfov_deg);
  if (obj.contains("center_px")) {
    const auto& c = obj.at("center_px");
    if (!c.is_array() || c.size() != 2)
      throw ValidationError("config: camera.center_px must be [a0, b0]");
    cam.center_x = c.at(0).get<double>();
    cam.center_y = c.at(1).get<double>();
  }
}

void parse_detect(const json& obj, DetectParams& d) {
  check_keys(obj, "detect",
             {"n_levels", "kept_layers", "morph_radius", "min_area", "max_area",
              "min_brightness", "max_chroma_gap", "depth_window"});
  fetch(obj, "detect", "n_levels", d.n_levels);
  fetch(obj, "detect", "kept_layers", d.kept_layers);
  fetch(obj, "detect", "morph_radius", d.morph_radius);
  fetch(obj, "detect", "min_area", d.min_area);
  fetch(obj, "detect", "max_area", d.max_area);
  fetch(obj, "detect", "min_brightness", d.min_brightness);
  fetch(obj, "detect", "max_chroma_gap", d.max_chroma_gap);
  fetch(obj, "detect", "depth_window", d.depth_window);
}

void parse_synth(const json& obj, SynthConfig& s) {
  check_keys(obj, "synth",
             {"trial_kind", "subject_id", "session_id", "static_seconds", "amplitude_deg",
              "period_s", "n_cycles", "fps", "head_radius_cm", "pivot_cm",
              "marker_angles_deg", "seed", "noise"});
  if (obj.contains("trial_kind"))
    s.trial_kind = trial_kind_from_string(obj.at("trial_kind").get<std::string>());
  fetch(obj, "synth", "subject_id", s.subject_id);
  fetch(obj, "synth", "session_id", s.session_id);
  fetch(obj, "synth", "static_seconds", s.static_seconds);
  fetch(obj, "synth", "amplitude_deg", s.profile.amplitude_deg);
  fetch(obj, "synth", "period_s", s.profile.period_s);
  fetch(obj, "synth", "n_cycles", s.profile.n_cycles);
  fetch(obj, "synth", "fps", s.profile.fps);
  fetch(obj, "synth", "head_radius_cm", s.profile.head_radius_cm);
  fetch(obj, "synth", "seed", s.profile.seed);
  if (obj.contains("pivot_cm")) {
    const auto& p = obj.at("pivot_cm");
    if (!p.is_array() || p.size() != 3)
      throw ValidationError("config: synth.pivot_cm must be [x, y, z]");
    s.profile.pivot_cm = Point3D(p.at(0).get<double>(), p.at(1).get<double>(),
                                 p.at(2).get<double>());
  }
  if (obj.contains("marker_angles_deg")) {
    const auto& a = obj.at("marker_angles_deg");
    if (!a.is_array() || a.size() != 3)
      throw ValidationError("config: synth.marker_angles_deg must have 3 entries");
    for (int i = 0; i < 3; ++i) s.profile.marker_angles_deg[i] = a.at(i).get<double>();
  }
  if (obj.contains("noise")) {
    const auto& n = obj.at("noise");
    check_keys(n, "synth.noise", {"pixel_sigma_px", "depth_sigma_mm", "dropout_prob"});
    fetch(n, "synth.noise", "pixel_sigma_px", s.profile.noise.pixel_sigma);
    fetch(n, "synth.noise", "depth_sigma_mm", s.profile.noise.depth_sigma);
    fetch(n, "synth.noise", "dropout_prob", s.profile.noise.dropout_prob);
  }
}

void validate_config(const Config& c) {
  validate(c.camera);
  if (c.detect.n_levels < 2) throw ValidationError("config: detect.n_levels must be >= 2");
  if (c.detect.kept_layers.empty())
    throw ValidationError("config: detect.kept_layers must not be empty");
  for (int layer : c.detect.kept_layers)
    if (layer < 1 || layer > c.detect.n_levels)
      throw ValidationError("config: detect.kept_layers entries must lie in [1, n_levels]");
  if (c.detect.morph_radius < 0)
    throw ValidationError("config: detect.morph_radius must be >= 0");
  if (c.detect.min_area < 1 || c.detect.max_area < c.detect.min_area)
    throw ValidationError("config: detect area band is invalid");
  if (c.detect.depth_window < 1 || c.detect.depth_window % 2 == 0)
    throw ValidationError("config: detect.depth_window must be odd and >= 1");
  if (!(c.track.sigma_process > 0) || !(c.track.sigma_meas > 0))
    throw ValidationError("config: track noise sigmas must be positive");
  if (!(c.track.gate_px > 0)) throw ValidationError("config: track.gate_px must be positive");
  if (c.track.max_missed < 0) throw ValidationError("config: track.max_missed must be >= 0");
  if (c.kinematics.smooth_window < 1 || c.kinematics.smooth_window % 2 == 0)
    throw ValidationError("config: kinematics.smooth_window must be odd");
  if (c.kinematics.smooth_order < 0 ||
      c.kinematics.smooth_order >= c.kinematics.smooth_window)
    throw ValidationError("config: kinematics.smooth_order must be < smooth_window");
  if (!(c.kinematics.chair_threshold_cm > 0))
    throw ValidationError("config: kinematics.chair_threshold_cm must be positive");
  if (c.normalization_points < 2)
    throw ValidationError("config: normalization_points must be >= 2");
  if (c.synth.static_seconds < 1)
    throw ValidationError("config: synth.static_seconds must be >= 1");
  validate(c.synth.profile);
}

}  // namespace

Config load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("config: cannot open " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("config: " + file.string() + ": " + e.what());
  }

  Config c = default_config();
  check_keys(doc, "",
             {"camera", "offset", "detect", "track", "kinematics", "normalization_points",
              "synth"});
  if (doc.contains("camera")) parse_camera(doc.at("camera"), c.camera);
  if (doc.contains("offset")) {
    check_keys(doc.at("offset"), "offset", {"dx_px", "dy_px"});
    fetch(doc.at("offset"), "offset", "dx_px", c.offset.dx);
    fetch(doc.at("offset"), "offset", "dy_px", c.offset.dy);
  }
  if (doc.contains("detect")) parse_detect(doc.at("detect"), c.detect);
  if (doc.contains("track")) {
    check_keys(doc.at("track"), "track", {"sigma_process", "sigma_meas", "gate_px", "max_missed"});
    fetch(doc.at("track"), "track", "sigma_process", c.track.sigma_process);
    fetch(doc.at("track"), "track", "sigma_meas", c.track.sigma_meas);
    fetch(doc.at("track"), "track", "gate_px", c.track.gate_px);
    fetch(doc.at("track"), "track", "max_missed", c.track.max_missed);
  }
  if (doc.contains("kinematics")) {
    check_keys(doc.at("kinematics"), "kinematics",
               {"smooth_window", "smooth_order", "chair_threshold_cm"});
    fetch(doc.at("kinematics"), "kinematics", "smooth_window", c.kinematics.smooth_window);
    fetch(doc.at("kinematics"), "kinematics", "smooth_order", c.kinematics.smooth_order);
    fetch(doc.at("kinematics"), "kinematics", "chair_threshold_cm",
          c.kinematics.chair_threshold_cm);
  }
  fetch(doc, "", "normalization_points", c.normalization_points);
  if (doc.contains("synth")) parse_synth(doc.at("synth"), c.synth);

  validate_config(c);
  return c;
}

std::string dump_config(const Config& c) {
  json doc;
  doc["camera"] = {{"width", c.camera.width},
                   {"height", c.camera.height},
                   {"hfov_deg", c.camera.hfov_deg},
                   {"vfov_deg", c.camera.vfov_deg},
                   {"center_px", {c.camera.center_x, c.camera.center_y}}};
  doc["offset"] = {{"dx_px", c.offset.dx}, {"dy_px", c.offset.dy}};
  doc["detect"] = {{"n_levels", c.detect.n_levels},
                   {"kept_layers", c.detect.kept_layers},
                   {"morph_radius", c.detect.morph_radius},
                   {"min_area", c.detect.min_area},
                   {"max_area", c.detect.max_area},
                   {"min_brightness", c.detect.min_brightness},
                   {"max_chroma_gap", c.detect.max_chroma_gap},
                   {"depth_window", c.detect.depth_window}};
  doc["track"] = {{"sigma_process", c.track.sigma_process},
                  {"sigma_meas", c.track.sigma_meas},
                  {"gate_px", c.track.gate_px},
                  {"max_missed", c.track.max_missed}};
  doc["kinematics"] = {{"smooth_window", c.kinematics.smooth_window},
                       {"smooth_order", c.kinematics.smooth_order},
                       {"chair_threshold_cm", c.kinematics.chair_threshold_cm}};
  doc["normalization_points"] = c.normalization_points;
  doc["synth"] = {{"trial_kind", to_string(c.synth.trial_kind)},
                  {"subject_id", c.synth.subject_id},
                  {"session_id", c.synth.session_id},
                  {"static_seconds", c.synth.static_seconds},
                  {"amplitude_deg", c.synth.profile.amplitude_deg},
                  {"period_s", c.synth.profile.period_s},
                  {"n_cycles", c.synth.profile.n_cycles},
                  {"fps", c.synth.profile.fps},
                  {"head_radius_cm", c.synth.profile.head_radius_cm},
                  {"pivot_cm",
                   {c.synth.profile.pivot_cm.x(), c.synth.profile.pivot_cm.y(),
                    c.synth.profile.pivot_cm.z()}},
                  {"marker_angles_deg",
                   {c.synth.profile.marker_angles_deg[0], c.synth.profile.marker_angles_deg[1],
                    c.synth.profile.marker_angles_deg[2]}},
                  {"seed", c.synth.profile.seed},
                  {"noise",
                   {{"pixel_sigma_px", c.synth.profile.noise.pixel_sigma},
                    {"depth_sigma_mm", c.synth.profile.noise.depth_sigma},
                    {"dropout_prob", c.synth.profile.noise.dropout_prob}}}};
  return doc.dump(2) + "\n";
}

}  // namespace flexo
