#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "flexo/frameio.hpp"

using namespace flexo;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() / (std::string("flexo_frameio_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SessionBundle black_bundle(int w, int h, int frames) {
  SessionBundle b;
  b.manifest.width = w;
  b.manifest.height = h;
  b.manifest.frame_count = frames;
  b.manifest.subject_id = "S0";
  b.manifest.session_id = "S0-static";
  b.manifest.trial_kind = TrialKind::Static;
  for (int i = 0; i < frames; ++i) {
    RgbFrame rgb;
    rgb.width = w;
    rgb.height = h;
    rgb.pixels.assign(static_cast<std::size_t>(w) * h * 3, 0);
    DepthFrame depth;
    depth.width = w;
    depth.height = h;
    depth.values.assign(static_cast<std::size_t>(w) * h, 0);
    b.rgb.push_back(std::move(rgb));
    b.depth.push_back(std::move(depth));
  }
  return b;
}

SessionBundle random_bundle(std::mt19937& rng) {
  std::uniform_int_distribution<int> dim(1, 32);
  std::uniform_int_distribution<int> frames(1, 4);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> word(0, 65535);

  SessionBundle b = black_bundle(2 * dim(rng), 2 * dim(rng), frames(rng));
  b.manifest.fps = std::uniform_real_distribution<double>(1.0, 120.0)(rng);
  b.manifest.subject_id = "R" + std::to_string(byte(rng));
  b.manifest.session_id = b.manifest.subject_id + "-x";
  b.manifest.trial_kind = byte(rng) % 2 ? TrialKind::Static : TrialKind::Motion;
  for (auto& f : b.rgb)
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(byte(rng));
  for (auto& f : b.depth)
    for (auto& v : f.values) v = static_cast<std::uint16_t>(word(rng));
  return b;
}

bool bundles_equal(const SessionBundle& a, const SessionBundle& b) {
  if (a.manifest.width != b.manifest.width || a.manifest.height != b.manifest.height ||
      a.manifest.fps != b.manifest.fps || a.manifest.frame_count != b.manifest.frame_count ||
      a.manifest.depth_unit != b.manifest.depth_unit ||
      a.manifest.subject_id != b.manifest.subject_id ||
      a.manifest.session_id != b.manifest.session_id ||
      a.manifest.trial_kind != b.manifest.trial_kind)
    return false;
  for (int i = 0; i < a.manifest.frame_count; ++i) {
    if (a.rgb[i].pixels != b.rgb[i].pixels) return false;
    if (a.depth[i].values != b.depth[i].values) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("single black frame round trip") {
  const fs::path dir = temp_dir("black");
  SessionBundle b = black_bundle(640, 480, 1);
  write_session(b, dir);
  const SessionBundle r = read_session(dir);
  CHECK(r.manifest.frame_count == 1);
  CHECK(std::all_of(r.rgb[0].pixels.begin(), r.rgb[0].pixels.end(),
                    [](std::uint8_t v) { return v == 0; }));
  CHECK(std::all_of(r.depth[0].values.begin(), r.depth[0].values.end(),
                    [](std::uint16_t v) { return v == 0; }));
  fs::remove_all(dir);
}

TEST_CASE("dimension mismatch vs manifest is reported with file and field") {
  const fs::path dir = temp_dir("dim");
  write_session(black_bundle(640, 480, 1), dir);
  // Replace the frame with a smaller one, keeping the manifest.
  RgbFrame small;
  small.width = 320;
  small.height = 240;
  small.pixels.assign(320 * 240 * 3, 0);
  write_ppm(small, dir / "rgb" / "000000.ppm");
  try {
    read_session(dir);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.field() == "dimensions");
    CHECK(e.file().find("000000.ppm") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("write then read is the identity on random bundles") {
  std::mt19937 rng(20240811);
  const fs::path dir = temp_dir("roundtrip");
  for (int k = 0; k < 20; ++k) {
    const SessionBundle b = random_bundle(rng);
    write_session(b, dir);
    CHECK(bundles_equal(b, read_session(dir)));
    fs::remove_all(dir);
  }
}

TEST_CASE("depth samples are written big-endian") {
  const fs::path dir = temp_dir("bigendian");
  SessionBundle b = black_bundle(2, 2, 1);
  b.depth[0].values = {1900, 0, 0, 0};
  write_session(b, dir);

  std::ifstream in(dir / "depth" / "000000.pgm", std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "P5\n2 2\n65535\n";
  REQUIRE(content.size() == header.size() + 8);
  CHECK(static_cast<unsigned char>(content[header.size()]) == 0x07);
  CHECK(static_cast<unsigned char>(content[header.size() + 1]) == 0x6C);
  fs::remove_all(dir);
}

TEST_CASE("empty bundles are rejected before writing") {
  const fs::path dir = temp_dir("empty");
  SessionBundle b = black_bundle(640, 480, 1);
  b.manifest.frame_count = 0;
  b.rgb.clear();
  b.depth.clear();
  CHECK_THROWS_AS(write_session(b, dir / "sub"), ValidationError);
  CHECK(!fs::exists(dir / "sub" / "manifest.json"));
  fs::remove_all(dir);
}

TEST_CASE("malformed headers name the file and field") {
  const fs::path dir = temp_dir("badheader");
  {
    std::ofstream out(dir / "bad.ppm", std::ios::binary);
    out << "P6\n-3 480\n255\n";
  }
  try {
    read_ppm(dir / "bad.ppm");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.field() == "width");
    CHECK(e.file().find("bad.ppm") != std::string::npos);
  }
  {
    std::ofstream out(dir / "bad.pgm", std::ios::binary);
    out << "P5\n2 2\n255\n";  // 8-bit maxval is not a depth frame
  }
  CHECK_THROWS_AS(read_pgm16(dir / "bad.pgm"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("timestamps come from the frame index") {
  SessionBundle b = black_bundle(4, 4, 3);
  b.manifest.fps = 30.0;
  CHECK(b.timestamp(0) == 0.0);
  CHECK(b.timestamp(1) == 1.0 / 30.0);
  CHECK(b.timestamp(2) == 2.0 / 30.0);
  // No accumulation: index 29999 is exactly 29999/30 s.
  CHECK(b.timestamp(29999) == 29999.0 / 30.0);
}

TEST_CASE("pgm decoding is host-byte-order independent") {
  const fs::path dir = temp_dir("endianless");
  {
    std::ofstream out(dir / "v.pgm", std::ios::binary);
    out << "P5\n1 1\n65535\n";
    const unsigned char bytes[2] = {0x12, 0x34};
    out.write(reinterpret_cast<const char*>(bytes), 2);
  }
  CHECK(read_pgm16(dir / "v.pgm").values[0] == 0x1234);
  fs::remove_all(dir);
}

TEST_CASE("comments in Netpbm headers are tolerated") {
  const fs::path dir = temp_dir("comments");
  {
    std::ofstream out(dir / "c.ppm", std::ios::binary);
    out << "P6\n# a comment\n1 1\n255\n";
    const unsigned char px[3] = {9, 8, 7};
    out.write(reinterpret_cast<const char*>(px), 3);
  }
  const RgbFrame f = read_ppm(dir / "c.ppm");
  CHECK(f.at(0, 0, 0) == 9);
  CHECK(f.at(0, 0, 2) == 7);
  fs::remove_all(dir);
}
