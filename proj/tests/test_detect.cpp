#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "flexo/detect.hpp"

using namespace flexo;

namespace {

DepthFrame depth_frame(int w, int h, std::uint16_t fill = 0) {
  DepthFrame f;
  f.width = w;
  f.height = h;
  f.values.assign(static_cast<std::size_t>(w) * h, fill);
  return f;
}

RgbFrame rgb_frame(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbFrame f;
  f.width = w;
  f.height = h;
  f.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
    f.pixels[3 * i] = r;
    f.pixels[3 * i + 1] = g;
    f.pixels[3 * i + 2] = b;
  }
  return f;
}

void draw_disk(RgbFrame& f, double cx, double cy, double radius) {
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= radius * radius) {
        f.at(x, y, 0) = 255;
        f.at(x, y, 1) = 255;
        f.at(x, y, 2) = 255;
      }
    }
}

// Exhaustive Otsu oracle over occupied histogram bins: tries every
// boundary placement and maximizes the between-class variance objective.
double exhaustive_otsu_best(const std::vector<int>& values, const std::vector<double>& weights,
                            int n_levels) {
  const int t = static_cast<int>(values.size());
  std::vector<double> pw(t + 1, 0), ps(t + 1, 0);
  for (int i = 0; i < t; ++i) {
    pw[i + 1] = pw[i] + weights[i];
    ps[i + 1] = ps[i] + weights[i] * values[i];
  }
  auto score = [&](int a, int b) {
    const double w = pw[b + 1] - pw[a];
    const double s = ps[b + 1] - ps[a];
    return s * s / w;
  };
  double best = -1;
  std::vector<int> bounds(n_levels - 1);
  // bounds[c] = last bin of class c
  auto recurse = [&](auto&& self, int c, int lo, double acc) -> void {
    if (c == n_levels - 1) {
      best = std::max(best, acc + score(lo, t - 1));
      return;
    }
    for (int j = lo; j <= t - (n_levels - c); ++j)
      self(self, c + 1, j + 1, acc + score(lo, j));
  };
  recurse(recurse, 0, 0, 0.0);
  return best;
}

double dp_objective(const DepthFrame& frame, const std::vector<double>& cuts) {
  // Recomputes the between-class objective the DP maximized.
  std::map<int, double> hist;
  for (std::uint16_t v : frame.values)
    if (v > 0) hist[v] += 1.0;
  std::vector<double> bounds = cuts;
  bounds.push_back(65536.0);
  double obj = 0, w = 0, s = 0;
  std::size_t k = 0;
  for (const auto& [v, c] : hist) {
    while (v >= bounds[k]) {
      obj += s * s / w;
      w = s = 0;
      ++k;
    }
    w += c;
    s += c * v;
  }
  obj += s * s / w;
  return obj;
}

// Brute-force 4/8-connectivity flood fill used as the component oracle.
std::vector<std::set<int>> flood_fill_oracle(const BinaryMask& mask) {
  std::vector<std::set<int>> comps;
  std::vector<char> seen(mask.bits.size(), 0);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      const int start = y * mask.width + x;
      if (!mask.bits[start] || seen[start]) continue;
      std::set<int> comp;
      std::vector<int> frontier{start};
      seen[start] = 1;
      while (!frontier.empty()) {
        const int idx = frontier.back();
        frontier.pop_back();
        comp.insert(idx);
        const int cx = idx % mask.width, cy = idx / mask.width;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= mask.width ||
                ny >= mask.height)
              continue;
            const int nidx = ny * mask.width + nx;
            if (mask.bits[nidx] && !seen[nidx]) {
              seen[nidx] = 1;
              frontier.push_back(nidx);
            }
          }
      }
      comps.push_back(std::move(comp));
    }
  return comps;
}

}  // namespace

TEST_CASE("two-value frame splits between the clusters") {
  DepthFrame f = depth_frame(10, 10);
  for (int i = 0; i < 50; ++i) f.values[i] = 1000;
  for (int i = 50; i < 100; ++i) f.values[i] = 2000;
  const auto cuts = multilevel_thresholds(f, 2);
  REQUIRE(cuts.size() == 1);
  CHECK(cuts[0] > 1000);
  CHECK(cuts[0] <= 2000);
}

TEST_CASE("constant frame has a degenerate histogram") {
  CHECK_THROWS_AS(multilevel_thresholds(depth_frame(8, 8, 1234), 2),
                  DegenerateHistogramError);
}

TEST_CASE("11-cluster frame: thresholds sit between adjacent centers and match "
          "the exhaustive oracle") {
  DepthFrame f = depth_frame(64, 64);
  std::mt19937 rng(7);
  std::vector<int> values;
  std::vector<double> weights;
  std::size_t idx = 0;
  for (int k = 0; k < 11; ++k) {
    const int center = 200 * (k + 1);
    const int count = 150 + static_cast<int>(rng() % 100);
    for (int side = 0; side < 2; ++side) {
      const int v = center + (side == 0 ? -1 : 1);
      const int c = count / 2 + (side == 0 ? count % 2 : 0);
      values.push_back(v);
      weights.push_back(c);
      for (int i = 0; i < c; ++i) f.values[idx++] = static_cast<std::uint16_t>(v);
    }
  }
  REQUIRE(idx <= f.values.size());

  const auto cuts = multilevel_thresholds(f, 11);
  REQUIRE(cuts.size() == 10);
  for (int k = 0; k < 10; ++k) {
    CHECK(cuts[k] > 200 * (k + 1));
    CHECK(cuts[k] < 200 * (k + 2));
  }
  CHECK(std::is_sorted(cuts.begin(), cuts.end()));
  CHECK(dp_objective(f, cuts) ==
        doctest::Approx(exhaustive_otsu_best(values, weights, 11)).epsilon(1e-12));
}

TEST_CASE("layer binarization") {
  DepthFrame zeros = depth_frame(4, 4);
  CHECK(binarize_layer(zeros, 0, 5000).count() == 0);

  DepthFrame f = depth_frame(4, 4);
  f.values[5] = 1500;
  CHECK(binarize_layer(f, 1000, 2000).bits[5] == 1);
  CHECK(binarize_layer(f, 0, 1).count() == 0);  // zero stays excluded
}

TEST_CASE("layer masks partition the valid pixels") {
  std::mt19937 rng(99);
  DepthFrame f = depth_frame(32, 32);
  for (auto& v : f.values) v = static_cast<std::uint16_t>(rng() % 2048);
  const auto cuts = multilevel_thresholds(f, 4);
  std::vector<double> bounds{0.0};
  bounds.insert(bounds.end(), cuts.begin(), cuts.end());
  bounds.push_back(65536.0);

  std::vector<int> cover(f.values.size(), 0);
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const BinaryMask m = binarize_layer(f, bounds[k], bounds[k + 1]);
    for (std::size_t i = 0; i < m.bits.size(); ++i) cover[i] += m.bits[i];
  }
  for (std::size_t i = 0; i < f.values.size(); ++i)
    CHECK(cover[i] == (f.values[i] == 0 ? 0 : 1));
}

TEST_CASE("rgb binarization keeps bright near-white pixels") {
  RgbFrame white = rgb_frame(1, 1, 255, 255, 255);
  CHECK(binarize_rgb(white, 200, 30).bits[0] == 1);
  RgbFrame red = rgb_frame(1, 1, 255, 0, 0);
  CHECK(binarize_rgb(red, 200, 30).bits[0] == 0);

  RgbFrame scene = rgb_frame(40, 40, 80, 80, 80);
  draw_disk(scene, 20.0, 20.0, 5.0);
  const BinaryMask mask = binarize_rgb(scene, 200, 30);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x) {
      const bool in_disk = (x - 20.0) * (x - 20.0) + (y - 20.0) * (y - 20.0) <= 25.0;
      CHECK(mask.at(x, y) == (in_disk ? 1 : 0));
    }
}

TEST_CASE("morphology basics") {
  BinaryMask speck(16, 16);
  speck.at(8, 8) = 1;
  CHECK(morph_open(speck, 1).count() == 0);

  BinaryMask square(30, 30);
  for (int y = 5; y < 25; ++y)
    for (int x = 5; x < 25; ++x) square.at(x, y) = 1;
  const BinaryMask opened = morph_open(square, 2);
  CHECK(square.count() - opened.count() <= 16);  // only corner rounding
  CHECK(opened.at(15, 15) == 1);

  BinaryMask full(9, 9);
  std::fill(full.bits.begin(), full.bits.end(), 1);
  CHECK(morph_close(full, 2).count() == full.count());
}

TEST_CASE("open shrinks and close grows, pixelwise") {
  std::mt19937 rng(4242);
  for (int trial = 0; trial < 25; ++trial) {
    BinaryMask m(24, 24);
    for (auto& b : m.bits) b = (rng() % 4) == 0;
    const BinaryMask o = morph_open(m, 1 + trial % 3);
    const BinaryMask c = morph_close(m, 1 + trial % 3);
    for (std::size_t i = 0; i < m.bits.size(); ++i) {
      CHECK(o.bits[i] <= m.bits[i]);
      CHECK(m.bits[i] <= c.bits[i]);
    }
  }
}

TEST_CASE("connected components: squares, diagonals, ordering") {
  BinaryMask m(20, 10);
  for (int y = 2; y < 5; ++y)
    for (int x = 2; x < 5; ++x) m.at(x, y) = 1;
  for (int y = 2; y < 5; ++y)
    for (int x = 12; x < 15; ++x) m.at(x, y) = 1;
  const auto blobs = connected_components(m, 1, 1000);
  REQUIRE(blobs.size() == 2);
  CHECK(blobs[0].cx == doctest::Approx(3.0));
  CHECK(blobs[0].cy == doctest::Approx(3.0));
  CHECK(blobs[1].cx == doctest::Approx(13.0));

  BinaryMask diag(5, 5);
  diag.at(1, 1) = 1;
  diag.at(2, 2) = 1;
  CHECK(connected_components(diag, 1, 100).size() == 1);
}

TEST_CASE("connected components agree with the flood-fill oracle") {
  std::mt19937 rng(20240812);
  for (int trial = 0; trial < 200; ++trial) {
    BinaryMask m(64, 64);
    const int density = 2 + trial % 5;
    for (auto& b : m.bits) b = (rng() % density) == 0;
    const auto oracle = flood_fill_oracle(m);
    const auto blobs = connected_components(m, 1, 64 * 64);
    REQUIRE(blobs.size() == oracle.size());

    std::multiset<int> oracle_areas, blob_areas;
    for (const auto& comp : oracle) oracle_areas.insert((int)comp.size());
    for (const Blob& b : blobs) blob_areas.insert(b.area);
    CHECK(oracle_areas == blob_areas);

    // Each blob must coincide with one oracle component: same area, same
    // bounding box, same centroid.
    for (const Blob& b : blobs) {
      bool matched = false;
      for (const auto& comp : oracle) {
        double sx = 0, sy = 0;
        int min_x = m.width, min_y = m.height, max_x = -1, max_y = -1;
        for (int idx : comp) {
          const int x = idx % m.width, y = idx / m.width;
          sx += x;
          sy += y;
          min_x = std::min(min_x, x);
          min_y = std::min(min_y, y);
          max_x = std::max(max_x, x);
          max_y = std::max(max_y, y);
        }
        if ((int)comp.size() == b.area && min_x == b.min_x && min_y == b.min_y &&
            max_x == b.max_x && max_y == b.max_y &&
            std::abs(sx / comp.size() - b.cx) < 1e-12 &&
            std::abs(sy / comp.size() - b.cy) < 1e-12) {
          matched = true;
          break;
        }
      }
      CHECK(matched);
    }
  }
}

TEST_CASE("detect_markers finds rendered disks to sub-pixel accuracy") {
  RgbFrame scene = rgb_frame(200, 150, 80, 80, 80);
  const double centers[5][2] = {
      {30.3, 40.7}, {90.5, 40.2}, {150.8, 41.1}, {60.4, 90.6}, {120.1, 120.9}};
  for (const auto& c : centers) draw_disk(scene, c[0], c[1], 4.0);

  DetectParams params;
  const auto dets = detect_markers(scene, params, 3);
  REQUIRE(dets.size() == 5);
  for (const auto& c : centers) {
    double best = 1e9;
    for (const auto& d : dets) best = std::min(best, std::hypot(d.x - c[0], d.y - c[1]));
    CHECK(best < 0.5);
  }
  CHECK(dets[0].frame_index == 3);
  CHECK(dets[0].source == DetectionSource::Rgb);

  const auto none = detect_markers(rgb_frame(64, 64, 80, 80, 80), params);
  CHECK(none.empty());
}

TEST_CASE("a marker split across two kept layers merges into one detection") {
  // Disk whose pixels alternate between two depth values in a checkerboard;
  // each parity class is symmetric about the center so both layer blobs
  // share one centroid and merge.
  DepthFrame f = depth_frame(40, 40);
  const int cx = 20, cy = 20;
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x) {
      const int dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= 16)
        f.at(x, y) = ((x + y) % 2 == 0) ? 1200 : 1400;
    }

  DetectParams params;
  params.n_levels = 2;
  params.kept_layers = {1, 2};
  params.morph_radius = 0;  // keep the parity sub-masks intact
  params.min_area = 9;
  params.max_area = 400;
  const auto dets = detect_markers(f, params);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].x == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(dets[0].y == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(dets[0].source == DetectionSource::Depth);
  CHECK(dets[0].layer.value() == 1);
}

TEST_CASE("sample_depth medians") {
  DepthFrame f = depth_frame(10, 10, 1900);
  CHECK(sample_depth(f, 5.2, 4.8, 5) == doctest::Approx(1900));

  DepthFrame zeros = depth_frame(10, 10, 0);
  CHECK_THROWS_AS(sample_depth(zeros, 5, 5, 3), NoDepthError);

  DepthFrame mixed = depth_frame(3, 3, 0);
  mixed.values[0] = 1898;
  mixed.values[1] = 1900;
  mixed.values[2] = 1902;
  CHECK(sample_depth(mixed, 1, 1, 3) == doctest::Approx(1900));

  CHECK_THROWS_AS(sample_depth(f, 5, 5, 4), ValidationError);  // even window
}
