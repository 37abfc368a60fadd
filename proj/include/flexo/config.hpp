#ifndef FLEXO_CONFIG_HPP
#define FLEXO_CONFIG_HPP

#include <filesystem>
#include <string>

#include "flexo/detect.hpp"
#include "flexo/kinematics.hpp"
#include "flexo/registration.hpp"
#include "flexo/synth.hpp"
#include "flexo/track.hpp"

namespace flexo {

struct SynthConfig {
  TrialKind trial_kind = TrialKind::Motion;
  std::string subject_id = "SYN";
  std::string session_id = "SYN-1";
  int static_seconds = 3;  // static-trial length; pose held at phi = 0
  MotionProfile profile;
};

/// One JSON document drives every subcommand. Unknown keys are rejected;
/// absent keys keep their defaults.
struct Config {
  CameraModel camera;
  Offset2D offset;  // ground-truth displacement used by `synthesize`
  DetectParams detect;
  TrackParams track;
  KinematicsParams kinematics;
  int normalization_points = 101;
  SynthConfig synth;
};

Config default_config();

/// Parses `file` over the defaults. Throws ValidationError on unknown
/// keys, wrong types, or values violating module invariants.
Config load_config(const std::filesystem::path& file);

/// The default configuration as a JSON string (documentation and
/// `--dump-config`).
std::string dump_config(const Config& config);

}  // namespace flexo

#endif  // FLEXO_CONFIG_HPP
