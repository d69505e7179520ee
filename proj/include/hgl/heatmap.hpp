#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hgl/landmarks.hpp"
#include "hgl/tensor.hpp"

namespace hgl {

struct Extent {
  std::size_t h = 0, w = 0;
};

struct GaussianSpec {
  double sigma = 1.0;              // heatmap pixels
  double truncation_radius = 3.0;  // heatmap pixels, default 3*sigma
  double peak = 1.0;
};

inline void validate(const GaussianSpec& g) {
  op_check(g.sigma > 0.0, "gaussian: sigma must be > 0");
  op_check(g.truncation_radius >= g.sigma, "gaussian: truncation radius must be >= sigma");
}

struct Vec2 {
  double x = 0.0, y = 0.0;
};

/// Pure per-axis scaling between image and heatmap pixel coordinates; the
/// two maps are mutual inverses on real-valued coordinates.
inline Vec2 image_to_heatmap_coords(Vec2 p, Extent image, Extent heatmap) {
  return {p.x * static_cast<double>(heatmap.w) / static_cast<double>(image.w),
          p.y * static_cast<double>(heatmap.h) / static_cast<double>(image.h)};
}

inline Vec2 heatmap_to_image_coords(Vec2 p, Extent image, Extent heatmap) {
  return {p.x * static_cast<double>(image.w) / static_cast<double>(heatmap.w),
          p.y * static_cast<double>(image.h) / static_cast<double>(heatmap.h)};
}

/// Ground-truth heatmaps: one channel per landmark holding a truncated 2D
/// Gaussian, peak at the mapped landmark position. Invisible landmarks and
/// landmarks mapping outside the heatmap produce all-zero channels; the
/// latter are reported through `out_of_bounds` when given.
template <typename T>
Tensor<T> encode_heatmaps(const LandmarkSet& landmarks, Extent image, Extent heatmap,
                          const GaussianSpec& spec = {},
                          std::vector<std::uint8_t>* out_of_bounds = nullptr) {
  validate(landmarks);
  validate(spec);
  op_check(image.h >= 1 && image.w >= 1 && heatmap.h >= 1 && heatmap.w >= 1,
           "encode: extents must be positive");
  const std::size_t m = landmarks.size(), H = heatmap.h, W = heatmap.w;
  if (out_of_bounds) out_of_bounds->assign(m, 0);
  std::vector<T> data(m * H * W, T(0));
  const double r = spec.truncation_radius;
  const double r2 = r * r;
  const double inv_two_sigma2 = 1.0 / (2.0 * spec.sigma * spec.sigma);
  for (std::size_t i = 0; i < m; ++i) {
    if (!landmarks.visible(i)) continue;
    const Vec2 c = image_to_heatmap_coords({landmarks.points[i].x, landmarks.points[i].y},
                                           image, heatmap);
    // Cell (row, col) covers centre (col, row); outside means the point
    // falls beyond every cell centre's half-cell reach.
    if (c.x < -0.5 || c.y < -0.5 || c.x >= static_cast<double>(W) - 0.5 ||
        c.y >= static_cast<double>(H) - 0.5) {
      if (out_of_bounds) (*out_of_bounds)[i] = 1;
      continue;
    }
    const std::ptrdiff_t r0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(c.y - r)));
    const std::ptrdiff_t r1 = std::min<std::ptrdiff_t>(H - 1, static_cast<std::ptrdiff_t>(std::floor(c.y + r)));
    const std::ptrdiff_t c0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(c.x - r)));
    const std::ptrdiff_t c1 = std::min<std::ptrdiff_t>(W - 1, static_cast<std::ptrdiff_t>(std::floor(c.x + r)));
    T* channel = data.data() + i * H * W;
    for (std::ptrdiff_t row = r0; row <= r1; ++row) {
      const double dy = static_cast<double>(row) - c.y;
      for (std::ptrdiff_t col = c0; col <= c1; ++col) {
        const double dx = static_cast<double>(col) - c.x;
        const double d2 = dx * dx + dy * dy;
        if (d2 > r2) continue;
        channel[row * W + col] = static_cast<T>(spec.peak * std::exp(-d2 * inv_two_sigma2));
      }
    }
  }
  return Tensor<T>::from_data({m, H, W}, std::move(data));
}

/// Decode heatmaps back to image-space landmarks: per channel the argmax
/// cell (first index on ties), a quarter-pixel shift toward the larger of
/// each axis-neighbour pair, then the heatmap-to-image map. Channels whose
/// maximum is at or below `confidence_floor` are marked invisible.
template <typename T>
LandmarkSet decode_heatmaps(const Tensor<T>& heatmaps, Extent image,
                            double confidence_floor = 0.05) {
  op_check(heatmaps.ndim() == 3, "decode: heatmaps must be (m,H,W), got " +
                                     shape_str(heatmaps.shape()));
  const std::size_t m = heatmaps.dim(0), H = heatmaps.dim(1), W = heatmaps.dim(2);
  const Extent hm{H, W};
  LandmarkSet out;
  out.points.resize(m);
  out.visibility.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const T* channel = heatmaps.data().data() + i * H * W;
    std::size_t best = 0;
    for (std::size_t j = 1; j < H * W; ++j)
      if (channel[j] > channel[best]) best = j;
    const std::size_t row = best / W, col = best % W;
    double x = static_cast<double>(col), y = static_cast<double>(row);
    if (col >= 1 && col + 1 < W) {
      const T left = channel[row * W + col - 1], right = channel[row * W + col + 1];
      if (right > left) x += 0.25;
      else if (left > right) x -= 0.25;
    }
    if (row >= 1 && row + 1 < H) {
      const T above = channel[(row - 1) * W + col], below = channel[(row + 1) * W + col];
      if (below > above) y += 0.25;
      else if (above > below) y -= 0.25;
    }
    const Vec2 p = heatmap_to_image_coords({x, y}, image, hm);
    out.points[i] = {p.x, p.y, 0.0};
    out.visibility[i] = static_cast<double>(channel[best]) > confidence_floor ? 1 : 0;
  }
  return out;
}

}  // namespace hgl
