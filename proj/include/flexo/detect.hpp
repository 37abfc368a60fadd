#ifndef FLEXO_DETECT_HPP
#define FLEXO_DETECT_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "flexo/error.hpp"
#include "flexo/frameio.hpp"

namespace flexo {

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row major, 0 or 1

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t& at(int x, int y) { return bits[y * width + x]; }
  std::uint8_t at(int x, int y) const { return bits[y * width + x]; }
  std::size_t count() const;
};

struct Blob {
  double cx = 0;  // sub-pixel centroid
  double cy = 0;
  int area = 0;
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

enum class DetectionSource { Rgb, Depth };

struct Detection2D {
  int frame_index = 0;
  double x = 0;
  double y = 0;
  DetectionSource source = DetectionSource::Rgb;
  std::optional<int> layer;  // threshold layer for depth detections, 1-based
};

/// Tunables for the per-frame marker detector. The depth-layer defaults
/// (11 levels, keep 6-9) suit a full indoor scene; sparse scenes such as
/// the synthetic renders need a coarser layering (see config shipped with
/// the CLI). The 9-400 px area band assumes markers a few pixels across at
/// roughly 1.9 m range and may need retuning for other setups.
struct DetectParams {
  int n_levels = 11;                        // depth threshold layers
  std::vector<int> kept_layers = {6, 7, 8, 9};
  int morph_radius = 1;                     // 0 skips morphological cleanup
  int min_area = 9;
  int max_area = 400;
  int min_brightness = 200;                 // RGB: min channel floor
  int max_chroma_gap = 30;                  // RGB: max channel spread
  int depth_window = 5;                     // odd, for sample_depth
};

/// Multi-level Otsu over the 11-bit depth histogram (zeros excluded):
/// returns n_levels-1 strictly increasing cut values (mm) maximizing the
/// between-class variance. Layer k (1-based) is [t_{k-1}, t_k) with the
/// implicit outer bounds. Throws DegenerateHistogramError when the frame
/// has fewer than n_levels distinct nonzero values.
std::vector<double> multilevel_thresholds(const DepthFrame& frame, int n_levels);

/// Mask of pixels with lo <= value < hi, zero sentinel always excluded.
BinaryMask binarize_layer(const DepthFrame& frame, double lo, double hi);

/// Mask of bright, near-achromatic pixels:
/// min(r,g,b) >= min_brightness and max(r,g,b)-min(r,g,b) <= max_chroma_gap.
BinaryMask binarize_rgb(const RgbFrame& frame, int min_brightness, int max_chroma_gap);

/// Erosion then dilation with a discrete disk {dx^2+dy^2 <= r^2}.
/// Pixels beyond the border count as background.
BinaryMask morph_open(const BinaryMask& mask, int radius);

/// Dilation then erosion with the same structuring element.
BinaryMask morph_close(const BinaryMask& mask, int radius);

/// 8-connected components with min_area <= area <= max_area, centroid as
/// the arithmetic mean of member coordinates, ordered by (min_y, min_x).
std::vector<Blob> connected_components(const BinaryMask& mask, int min_area, int max_area);

/// RGB pipeline: binarize -> open -> close -> components -> centroids.
std::vector<Detection2D> detect_markers(const RgbFrame& frame, const DetectParams& params,
                                        int frame_index = 0);

/// Depth pipeline: the same chain per kept layer, then a union of the
/// per-layer detections in which centroids closer than 3 px merge into one
/// area-weighted detection (kept layer index = smallest contributor).
std::vector<Detection2D> detect_markers(const DepthFrame& frame, const DetectParams& params,
                                        int frame_index = 0);

/// Median of the nonzero depth values in the window x window neighborhood
/// centered at the rounded position, clipped to the image. Even counts
/// average the two middle values. Throws NoDepthError when every pixel in
/// the window is the zero sentinel.
double sample_depth(const DepthFrame& frame, double x, double y, int window);

}  // namespace flexo

#endif  // FLEXO_DETECT_HPP
