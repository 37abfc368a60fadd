#ifndef FLEXO_FRAMEIO_HPP
#define FLEXO_FRAMEIO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flexo/error.hpp"

namespace flexo {

enum class TrialKind { Static, Motion };

const char* to_string(TrialKind kind);
TrialKind trial_kind_from_string(const std::string& name);

/// Recording metadata stored as manifest.json at the bundle root.
struct Manifest {
  int width = 640;
  int height = 480;
  double fps = 30.0;
  int frame_count = 0;
  int depth_unit = 1;  // millimeters per depth count
  std::string subject_id;
  std::string session_id;
  TrialKind trial_kind = TrialKind::Motion;
};

/// Interleaved 8-bit RGB image, row major.
struct RgbFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width*height*3 bytes, r g b order

  std::uint8_t& at(int x, int y, int c) { return pixels[3 * (y * width + x) + c]; }
  std::uint8_t at(int x, int y, int c) const { return pixels[3 * (y * width + x) + c]; }
};

/// 16-bit depth image in millimeters, row major. 0 marks an unread pixel.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;  // width*height samples

  std::uint16_t& at(int x, int y) { return values[y * width + x]; }
  std::uint16_t at(int x, int y) const { return values[y * width + x]; }
};

/// One recording: synchronized RGB and depth streams plus metadata.
/// Frame i of either stream is timestamped i / fps seconds.
struct SessionBundle {
  Manifest manifest;
  std::vector<RgbFrame> rgb;
  std::vector<DepthFrame> depth;

  double timestamp(int frame_index) const { return frame_index / manifest.fps; }
};

/// Throws ValidationError if any bundle invariant is broken (dimensions,
/// buffer sizes, fps, frame counts).
void validate(const SessionBundle& bundle);

/// Reads manifest.json, rgb/NNNNNN.ppm and depth/NNNNNN.pgm from `dir`.
/// Throws IoError naming the offending file and field on any mismatch.
SessionBundle read_session(const std::filesystem::path& dir);

/// Writes the bundle as binary P6 PPM (maxval 255) and P5 PGM
/// (maxval 65535, big-endian samples) files plus manifest.json.
void write_session(const SessionBundle& bundle, const std::filesystem::path& dir);

// Single-image codecs, exposed for tests and tooling.
RgbFrame read_ppm(const std::filesystem::path& file);
DepthFrame read_pgm16(const std::filesystem::path& file);
void write_ppm(const RgbFrame& frame, const std::filesystem::path& file);
void write_pgm16(const DepthFrame& frame, const std::filesystem::path& file);

}  // namespace flexo

#endif  // FLEXO_FRAMEIO_HPP
