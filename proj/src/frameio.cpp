#include "flexo/frameio.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace flexo {

using json = nlohmann::ordered_json;

const char* to_string(TrialKind kind) {
  return kind == TrialKind::Static ? "static" : "motion";
}

TrialKind trial_kind_from_string(const std::string& name) {
  if (name == "static") return TrialKind::Static;
  if (name == "motion") return TrialKind::Motion;
  throw ValidationError("unknown trial_kind: " + name);
}

MarkerRole role_from_string(const std::string& name) {
  for (MarkerRole role : kAllRoles)
    if (name == to_string(role)) return role;
  throw ValidationError("unknown marker role: " + name);
}

void validate(const SessionBundle& bundle) {
  const Manifest& m = bundle.manifest;
  if (m.width <= 0 || m.height <= 0 || m.width % 2 != 0 || m.height % 2 != 0)
    throw ValidationError("manifest dimensions must be positive and even");
  if (!(m.fps > 0)) throw ValidationError("manifest fps must be positive");
  if (m.frame_count < 1) throw ValidationError("manifest frame_count must be >= 1");
  if (m.depth_unit != 1) throw ValidationError("manifest depth_unit must be 1");
  if (static_cast<int>(bundle.rgb.size()) != m.frame_count ||
      static_cast<int>(bundle.depth.size()) != m.frame_count)
    throw ValidationError("stream lengths disagree with manifest frame_count");
  for (int i = 0; i < m.frame_count; ++i) {
    const RgbFrame& rgb = bundle.rgb[i];
    const DepthFrame& depth = bundle.depth[i];
    if (rgb.width != m.width || rgb.height != m.height ||
        rgb.pixels.size() != static_cast<std::size_t>(m.width) * m.height * 3)
      throw ValidationError("rgb frame " + std::to_string(i) + " has wrong shape");
    if (depth.width != m.width || depth.height != m.height ||
        depth.values.size() != static_cast<std::size_t>(m.width) * m.height)
      throw ValidationError("depth frame " + std::to_string(i) + " has wrong shape");
  }
}

namespace {

std::string frame_name(int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.%s", index, ext);
  return buf;
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

int parse_dim(const std::string& tok, const std::filesystem::path& file,
              const char* field) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError(file.string(), field, "expected positive integer, got '" + tok + "'");
  }
}

struct PnmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
};

PnmHeader read_pnm_header(std::istream& in, const std::filesystem::path& file,
                          const char* magic) {
  std::string tok = next_token(in);
  if (tok != magic)
    throw IoError(file.string(), "magic",
                  std::string("expected ") + magic + ", got '" + tok + "'");
  PnmHeader h;
  h.width = parse_dim(next_token(in), file, "width");
  h.height = parse_dim(next_token(in), file, "height");
  h.maxval = parse_dim(next_token(in), file, "maxval");
  // The single whitespace byte after maxval was already consumed by the
  // token reader; raster data starts immediately.
  return h;
}

std::ifstream open_binary(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError(file.string(), "file", "cannot open for reading");
  return in;
}

std::ofstream create_binary(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(file.string(), "file", "cannot open for writing");
  return out;
}

}  // namespace

RgbFrame read_ppm(const std::filesystem::path& file) {
  std::ifstream in = open_binary(file);
  PnmHeader h = read_pnm_header(in, file, "P6");
  if (h.maxval != 255)
    throw IoError(file.string(), "maxval", "expected 255, got " + std::to_string(h.maxval));
  RgbFrame frame;
  frame.width = h.width;
  frame.height = h.height;
  frame.pixels.resize(static_cast<std::size_t>(h.width) * h.height * 3);
  in.read(reinterpret_cast<char*>(frame.pixels.data()),
          static_cast<std::streamsize>(frame.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(frame.pixels.size()))
    throw IoError(file.string(), "raster", "truncated pixel data");
  return frame;
}

DepthFrame read_pgm16(const std::filesystem::path& file) {
  std::ifstream in = open_binary(file);
  PnmHeader h = read_pnm_header(in, file, "P5");
  if (h.maxval != 65535)
    throw IoError(file.string(), "maxval", "expected 65535, got " + std::to_string(h.maxval));
  DepthFrame frame;
  frame.width = h.width;
  frame.height = h.height;
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  std::vector<std::uint8_t> raw(n * 2);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IoError(file.string(), "raster", "truncated sample data");
  frame.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // PGM stores the most significant byte first.
    frame.values[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  }
  return frame;
}

void write_ppm(const RgbFrame& frame, const std::filesystem::path& file) {
  std::ofstream out = create_binary(file);
  out << "P6\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) throw IoError(file.string(), "raster", "write failed");
}

void write_pgm16(const DepthFrame& frame, const std::filesystem::path& file) {
  std::ofstream out = create_binary(file);
  out << "P5\n" << frame.width << ' ' << frame.height << "\n65535\n";
  std::vector<std::uint8_t> raw(frame.values.size() * 2);
  for (std::size_t i = 0; i < frame.values.size(); ++i) {
    raw[2 * i] = static_cast<std::uint8_t>(frame.values[i] >> 8);
    raw[2 * i + 1] = static_cast<std::uint8_t>(frame.values[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError(file.string(), "raster", "write failed");
}

namespace {

Manifest manifest_from_json(const json& doc, const std::filesystem::path& file) {
  Manifest m;
  auto require = [&](const char* key) -> const json& {
    if (!doc.contains(key)) throw IoError(file.string(), key, "missing manifest key");
    return doc.at(key);
  };
  try {
    m.width = require("width").get<int>();
    m.height = require("height").get<int>();
    m.fps = require("fps").get<double>();
    m.frame_count = require("frame_count").get<int>();
    m.depth_unit = require("depth_unit").get<int>();
    m.subject_id = require("subject_id").get<std::string>();
    m.session_id = require("session_id").get<std::string>();
    m.trial_kind = trial_kind_from_string(require("trial_kind").get<std::string>());
  } catch (const json::exception& e) {
    throw IoError(file.string(), "manifest", e.what());
  }
  return m;
}

json manifest_to_json(const Manifest& m) {
  json doc;
  doc["width"] = m.width;
  doc["height"] = m.height;
  doc["fps"] = m.fps;
  doc["frame_count"] = m.frame_count;
  doc["depth_unit"] = m.depth_unit;
  doc["subject_id"] = m.subject_id;
  doc["session_id"] = m.session_id;
  doc["trial_kind"] = to_string(m.trial_kind);
  return doc;
}

}  // namespace

SessionBundle read_session(const std::filesystem::path& dir) {
  const std::filesystem::path manifest_file = dir / "manifest.json";
  std::ifstream in(manifest_file);
  if (!in) throw IoError(manifest_file.string(), "file", "cannot open for reading");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(manifest_file.string(), "json", e.what());
  }

  SessionBundle bundle;
  bundle.manifest = manifest_from_json(doc, manifest_file);
  const Manifest& m = bundle.manifest;
  if (m.frame_count < 1)
    throw IoError(manifest_file.string(), "frame_count", "must be >= 1");

  bundle.rgb.reserve(m.frame_count);
  bundle.depth.reserve(m.frame_count);
  for (int i = 0; i < m.frame_count; ++i) {
    const std::filesystem::path rgb_file = dir / "rgb" / frame_name(i, "ppm");
    RgbFrame rgb = read_ppm(rgb_file);
    if (rgb.width != m.width || rgb.height != m.height)
      throw IoError(rgb_file.string(), "dimensions",
                    "frame is " + std::to_string(rgb.width) + "x" + std::to_string(rgb.height) +
                        " but manifest says " + std::to_string(m.width) + "x" +
                        std::to_string(m.height));
    bundle.rgb.push_back(std::move(rgb));

    const std::filesystem::path depth_file = dir / "depth" / frame_name(i, "pgm");
    DepthFrame depth = read_pgm16(depth_file);
    if (depth.width != m.width || depth.height != m.height)
      throw IoError(depth_file.string(), "dimensions",
                    "frame is " + std::to_string(depth.width) + "x" + std::to_string(depth.height) +
                        " but manifest says " + std::to_string(m.width) + "x" +
                        std::to_string(m.height));
    bundle.depth.push_back(std::move(depth));
  }
  return bundle;
}

void write_session(const SessionBundle& bundle, const std::filesystem::path& dir) {
  validate(bundle);
  std::error_code ec;
  std::filesystem::create_directories(dir / "rgb", ec);
  std::filesystem::create_directories(dir / "depth", ec);
  if (!std::filesystem::is_directory(dir / "rgb") ||
      !std::filesystem::is_directory(dir / "depth"))
    throw IoError(dir.string(), "directory", "cannot create bundle layout");

  const std::filesystem::path manifest_file = dir / "manifest.json";
  {
    std::ofstream out(manifest_file, std::ios::trunc);
    if (!out) throw IoError(manifest_file.string(), "file", "cannot open for writing");
    out << manifest_to_json(bundle.manifest).dump(2) << '\n';
    if (!out) throw IoError(manifest_file.string(), "file", "write failed");
  }
  for (int i = 0; i < bundle.manifest.frame_count; ++i) {
    write_ppm(bundle.rgb[i], dir / "rgb" / frame_name(i, "ppm"));
    write_pgm16(bundle.depth[i], dir / "depth" / frame_name(i, "pgm"));
  }
}

}  // namespace flexo
