#include "flexo/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace flexo {

namespace {
constexpr int kHistBins = 2048;        // 11-bit depth histogram
constexpr double kMergeRadiusPx = 3.0; // cross-layer centroid merge distance
}  // namespace

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::vector<double> multilevel_thresholds(const DepthFrame& frame, int n_levels) {
  if (n_levels < 2) throw ValidationError("n_levels must be >= 2");

  std::vector<std::int64_t> hist(kHistBins, 0);
  for (std::uint16_t v : frame.values) {
    if (v == 0) continue;
    hist[std::min<int>(v, kHistBins - 1)]++;
  }

  // Compress to occupied bins so every class is guaranteed nonempty.
  std::vector<int> value;       // bin value (mm)
  std::vector<double> weight;   // occurrence count
  for (int v = 1; v < kHistBins; ++v) {
    if (hist[v] > 0) {
      value.push_back(v);
      weight.push_back(static_cast<double>(hist[v]));
    }
  }
  const int t = static_cast<int>(value.size());
  if (t < n_levels)
    throw DegenerateHistogramError("found " + std::to_string(t) +
                                   " distinct nonzero depth values, need >= " +
                                   std::to_string(n_levels));

  // Prefix sums over occupied bins; the between-class variance decomposes
  // into a sum of (class mass)^2 / weight terms, so maximizing
  // sum_k S_k^2 / W_k over all contiguous partitions is exact Otsu.
  std::vector<double> pw(t + 1, 0.0), ps(t + 1, 0.0);
  for (int i = 0; i < t; ++i) {
    pw[i + 1] = pw[i] + weight[i];
    ps[i + 1] = ps[i] + weight[i] * value[i];
  }
  auto score = [&](int a, int b) {  // bins [a, b], inclusive
    const double w = pw[b + 1] - pw[a];
    const double s = ps[b + 1] - ps[a];
    return s * s / w;
  };

  const int k = n_levels;
  const double neg = -std::numeric_limits<double>::infinity();
  // best[c][i]: max objective using classes 0..c over bins 0..i
  std::vector<std::vector<double>> best(k, std::vector<double>(t, neg));
  std::vector<std::vector<int>> split(k, std::vector<int>(t, -1));
  for (int i = 0; i < t; ++i) best[0][i] = score(0, i);
  for (int c = 1; c < k; ++c) {
    for (int i = c; i < t; ++i) {
      double acc = neg;
      int arg = -1;
      for (int j = c - 1; j < i; ++j) {
        const double cand = best[c - 1][j] + score(j + 1, i);
        if (cand > acc) {  // strict: ties keep the smallest split
          acc = cand;
          arg = j;
        }
      }
      best[c][i] = acc;
      split[c][i] = arg;
    }
  }

  std::vector<double> thresholds(k - 1);
  int i = t - 1;
  for (int c = k - 1; c >= 1; --c) {
    const int j = split[c][i];
    thresholds[c - 1] = static_cast<double>(value[j] + 1);
    i = j;
  }
  return thresholds;
}

BinaryMask binarize_layer(const DepthFrame& frame, double lo, double hi) {
  if (!(lo < hi)) throw ValidationError("binarize_layer requires lo < hi");
  BinaryMask mask(frame.width, frame.height);
  for (std::size_t i = 0; i < frame.values.size(); ++i) {
    const std::uint16_t v = frame.values[i];
    mask.bits[i] = (v != 0 && lo <= v && v < hi) ? 1 : 0;
  }
  return mask;
}

BinaryMask binarize_rgb(const RgbFrame& frame, int min_brightness, int max_chroma_gap) {
  BinaryMask mask(frame.width, frame.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    const std::uint8_t r = frame.pixels[3 * i];
    const std::uint8_t g = frame.pixels[3 * i + 1];
    const std::uint8_t b = frame.pixels[3 * i + 2];
    const int lo = std::min({r, g, b});
    const int hi = std::max({r, g, b});
    mask.bits[i] = (lo >= min_brightness && hi - lo <= max_chroma_gap) ? 1 : 0;
  }
  return mask;
}

namespace {

std::vector<std::pair<int, int>> disk_offsets(int radius) {
  std::vector<std::pair<int, int>> offs;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) offs.emplace_back(dx, dy);
  return offs;
}

BinaryMask erode(const BinaryMask& mask, const std::vector<std::pair<int, int>>& offs) {
  BinaryMask out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      std::uint8_t keep = 1;
      for (const auto& [dx, dy] : offs) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height || !mask.at(nx, ny)) {
          keep = 0;
          break;
        }
      }
      out.at(x, y) = keep;
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, const std::vector<std::pair<int, int>>& offs) {
  BinaryMask out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      for (const auto& [dx, dy] : offs) {
        const int nx = x + dx, ny = y + dy;
        if (nx >= 0 && ny >= 0 && nx < mask.width && ny < mask.height) out.at(nx, ny) = 1;
      }
    }
  }
  return out;
}

}  // namespace

BinaryMask morph_open(const BinaryMask& mask, int radius) {
  if (radius < 1) throw ValidationError("morph radius must be >= 1");
  const auto offs = disk_offsets(radius);
  return dilate(erode(mask, offs), offs);
}

BinaryMask morph_close(const BinaryMask& mask, int radius) {
  if (radius < 1) throw ValidationError("morph radius must be >= 1");
  const auto offs = disk_offsets(radius);
  return erode(dilate(mask, offs), offs);
}

std::vector<Blob> connected_components(const BinaryMask& mask, int min_area, int max_area) {
  if (min_area < 1) throw ValidationError("min_area must be >= 1");
  const int w = mask.width, h = mask.height;
  std::vector<std::uint8_t> seen(mask.bits.size(), 0);
  std::vector<Blob> blobs;
  std::vector<int> stack;

  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const int start = y0 * w + x0;
      if (!mask.bits[start] || seen[start]) continue;

      Blob blob;
      blob.min_x = blob.max_x = x0;
      blob.min_y = blob.max_y = y0;
      double sx = 0, sy = 0;
      stack.push_back(start);
      seen[start] = 1;
      while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        const int x = idx % w, y = idx / w;
        blob.area++;
        sx += x;
        sy += y;
        blob.min_x = std::min(blob.min_x, x);
        blob.max_x = std::max(blob.max_x, x);
        blob.min_y = std::min(blob.min_y, y);
        blob.max_y = std::max(blob.max_y, y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const int nidx = ny * w + nx;
            if (mask.bits[nidx] && !seen[nidx]) {
              seen[nidx] = 1;
              stack.push_back(nidx);
            }
          }
        }
      }
      if (blob.area < min_area || blob.area > max_area) continue;
      blob.cx = sx / blob.area;
      blob.cy = sy / blob.area;
      blobs.push_back(blob);
    }
  }
  std::sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
    return std::tie(a.min_y, a.min_x) < std::tie(b.min_y, b.min_x);
  });
  return blobs;
}

namespace {

std::vector<Blob> mask_to_blobs(BinaryMask mask, const DetectParams& params) {
  if (params.morph_radius > 0) {
    mask = morph_close(morph_open(mask, params.morph_radius), params.morph_radius);
  }
  return connected_components(mask, params.min_area, params.max_area);
}

}  // namespace

std::vector<Detection2D> detect_markers(const RgbFrame& frame, const DetectParams& params,
                                        int frame_index) {
  const BinaryMask mask = binarize_rgb(frame, params.min_brightness, params.max_chroma_gap);
  std::vector<Detection2D> out;
  for (const Blob& blob : mask_to_blobs(mask, params)) {
    out.push_back({frame_index, blob.cx, blob.cy, DetectionSource::Rgb, std::nullopt});
  }
  return out;
}

std::vector<Detection2D> detect_markers(const DepthFrame& frame, const DetectParams& params,
                                        int frame_index) {
  const std::vector<double> cuts = multilevel_thresholds(frame, params.n_levels);

  struct Merged {
    double cx, cy;
    double area;
    int layer;
  };
  std::vector<Merged> merged;

  for (int layer : params.kept_layers) {
    if (layer < 1 || layer > params.n_levels)
      throw ValidationError("kept layer " + std::to_string(layer) + " out of range");
    const double lo = layer == 1 ? 0.0 : cuts[layer - 2];
    const double hi = layer == params.n_levels ? 65536.0 : cuts[layer - 1];
    for (const Blob& blob : mask_to_blobs(binarize_layer(frame, lo, hi), params)) {
      bool absorbed = false;
      for (Merged& m : merged) {
        if (std::hypot(blob.cx - m.cx, blob.cy - m.cy) < kMergeRadiusPx) {
          const double total = m.area + blob.area;
          m.cx = (m.cx * m.area + blob.cx * blob.area) / total;
          m.cy = (m.cy * m.area + blob.cy * blob.area) / total;
          m.area = total;
          m.layer = std::min(m.layer, layer);
          absorbed = true;
          break;
        }
      }
      if (!absorbed) merged.push_back({blob.cx, blob.cy, static_cast<double>(blob.area), layer});
    }
  }

  std::sort(merged.begin(), merged.end(), [](const Merged& a, const Merged& b) {
    return std::tie(a.cy, a.cx) < std::tie(b.cy, b.cx);
  });
  std::vector<Detection2D> out;
  for (const Merged& m : merged) {
    out.push_back({frame_index, m.cx, m.cy, DetectionSource::Depth, m.layer});
  }
  return out;
}

double sample_depth(const DepthFrame& frame, double x, double y, int window) {
  if (window < 1 || window % 2 == 0) throw ValidationError("depth window must be odd and >= 1");
  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));
  const int half = window / 2;
  std::vector<std::uint16_t> vals;
  vals.reserve(static_cast<std::size_t>(window) * window);
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const int nx = cx + dx, ny = cy + dy;
      if (nx < 0 || ny < 0 || nx >= frame.width || ny >= frame.height) continue;
      const std::uint16_t v = frame.at(nx, ny);
      if (v != 0) vals.push_back(v);
    }
  }
  if (vals.empty())
    throw NoDepthError("no valid depth around (" + std::to_string(cx) + "," +
                       std::to_string(cy) + ")");
  std::sort(vals.begin(), vals.end());
  const std::size_t n = vals.size();
  if (n % 2 == 1) return vals[n / 2];
  return 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
}

}  // namespace flexo
