#ifndef FLEXO_PIPELINE_HPP
#define FLEXO_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flexo/config.hpp"
#include "flexo/reliability.hpp"

namespace flexo {

/// Output of the static-trial calibration step.
struct Calibration {
  Offset2D offset;
  ReferenceFrame reference;
  std::map<MarkerRole, MarkerInit> markers;
  std::string subject_id;
};

/// Maps exactly five (or, degraded, four) detections of one frame onto
/// roles by the scene layout: the three topmost are the headband markers
/// ordered left to right, of the rest the upper is MA1 and the lower MS1.
/// Throws MissingRoleError naming the absent role when fewer than five
/// detections are present.
std::map<MarkerRole, Detection2D> assign_roles(const std::vector<Detection2D>& detections,
                                               int image_height);

/// Full static-trial calibration: per-frame RGB + depth detection, offset
/// estimation, role assignment, reference-frame construction and initial
/// track positions. Throws on non-static bundles, missing roles, or an
/// unstable pose.
Calibration calibrate_session(const SessionBundle& bundle, const Config& config);

void save_calibration(const Calibration& calibration, const std::filesystem::path& file);
Calibration load_calibration(const std::filesystem::path& file);

/// Everything `analyze` writes for one session.
struct SessionRecord {
  std::string subject_id;
  std::string session_id;
  KinematicReport report;
  Eigen::VectorXd x_cm;  // MT1 position relative to MA1, sagittal forward
  Eigen::VectorXd y_cm;  // and up components, smoothed
};

SessionRecord analyze_bundle(const SessionBundle& bundle, const Calibration& calibration,
                             const Config& config);

void save_record(const SessionRecord& record, const std::filesystem::path& json_file);
SessionRecord load_record(const std::filesystem::path& json_file);

/// CSV of the angle series: t_s,phi_deg,omega_deg_s,omega_dot_deg_s2.
std::string record_csv(const SessionRecord& record);

/// Aligned-column text rendering of a reliability report, one block per
/// quantity with SEM / CMC / Pearson per session pair.
std::string reliability_table(const ReliabilityReport& report);

// Subcommand drivers used by the CLI binary. Exit codes: 0 success,
// 2 input/validation failure, 3 completed with warnings (chair moved),
// 4 tracking failure. Diagnostics go to stderr.

int cmd_synthesize(const Config& config, const std::filesystem::path& out_dir,
                   std::optional<std::uint64_t> seed_override);

int cmd_calibrate(const std::filesystem::path& bundle_dir, const Config& config,
                  const std::filesystem::path& out_dir);

int cmd_analyze(const std::filesystem::path& bundle_dir,
                const std::filesystem::path& calibration_file, const Config& config,
                const std::filesystem::path& out_dir);

int cmd_reliability(const std::vector<std::filesystem::path>& record_files,
                    const Config& config, const std::filesystem::path& out_dir);

}  // namespace flexo

#endif  // FLEXO_PIPELINE_HPP
