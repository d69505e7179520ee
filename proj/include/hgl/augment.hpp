#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "hgl/image.hpp"
#include "hgl/landmarks.hpp"
#include "hgl/rng.hpp"

namespace hgl {

struct Sample {
  Image image;
  LandmarkSet landmarks;
};

struct AugmentConfig {
  double flip_prob = 0.5;
  std::vector<std::pair<std::size_t, std::size_t>> flip_swap_map;  // left/right pairs
  double rotate_deg_lo = -30.0, rotate_deg_hi = 30.0;
  double scale_lo = 0.75, scale_hi = 1.25;
  double jitter_lo = 0.8, jitter_hi = 1.2;        // per-channel multiplicative
  double occlusion_prob = 0.3;
  double occlusion_max_area = 0.3;                // fraction of the landmark bbox
  float occlusion_value = 0.5f;
};

inline void validate_augment(const AugmentConfig& c, std::size_t m) {
  op_check(c.flip_prob >= 0.0 && c.flip_prob <= 1.0, "augment: flip_prob must be in [0,1]");
  op_check(c.occlusion_prob >= 0.0 && c.occlusion_prob <= 1.0,
           "augment: occlusion_prob must be in [0,1]");
  op_check(c.scale_lo > 0.0 && c.scale_hi >= c.scale_lo, "augment: scale range must be positive");
  op_check(c.rotate_deg_hi >= c.rotate_deg_lo, "augment: empty rotation range");
  op_check(c.jitter_hi >= c.jitter_lo && c.jitter_lo >= 0.0, "augment: bad jitter range");
  op_check(c.occlusion_max_area >= 0.0 && c.occlusion_max_area <= 1.0,
           "augment: occlusion area fraction must be in [0,1]");
  op_check(c.flip_prob == 0.0 || !c.flip_swap_map.empty(),
           "augment: flipping enabled but the scheme has no swap map");
  std::vector<std::uint8_t> seen(m, 0);
  for (auto [a, b] : c.flip_swap_map) {
    op_check(a < m && b < m, "augment: swap map index out of range for m = " + std::to_string(m));
    op_check(a != b && !seen[a] && !seen[b],
             "augment: swap map is not an involution (index used twice)");
    seen[a] = seen[b] = 1;
  }
}

/// Horizontal mirror: pixels reversed per row, x <- width-1-x for every
/// landmark, and the swap map permutes indices so semantic left/right
/// labels stay correct. Applied with probability flip_prob.
inline Sample random_flip(const Sample& s, const AugmentConfig& cfg, Rng& rng) {
  if (!rng.bernoulli(cfg.flip_prob)) return s;
  Sample out = s;
  const std::size_t w = s.image.w;
  for (std::size_t c = 0; c < s.image.channels; ++c)
    for (std::size_t y = 0; y < s.image.h; ++y)
      for (std::size_t x = 0; x < w; ++x) out.image.at(c, y, x) = s.image.at(c, y, w - 1 - x);
  for (auto& p : out.landmarks.points) p.x = static_cast<double>(w - 1) - p.x;
  for (auto [a, b] : cfg.flip_swap_map) {
    std::swap(out.landmarks.points[a], out.landmarks.points[b]);
    std::swap(out.landmarks.visibility[a], out.landmarks.visibility[b]);
  }
  return out;
}

namespace detail {

/// Landmarks leaving the pixel grid become invisible, never clamped.
inline void mark_out_of_frame(LandmarkSet& lm, std::size_t h, std::size_t w) {
  for (std::size_t i = 0; i < lm.size(); ++i) {
    const auto& p = lm.points[i];
    if (p.x < 0.0 || p.y < 0.0 || p.x > static_cast<double>(w - 1) ||
        p.y > static_cast<double>(h - 1))
      lm.visibility[i] = 0;
  }
}

}  // namespace detail

/// Similarity transform about the visible-landmark bbox centre, applied
/// identically to pixels (bilinear, zero fill) and landmark coordinates.
inline Sample random_rotate_scale(const Sample& s, const AugmentConfig& cfg, Rng& rng) {
  const double angle = rng.uniform(cfg.rotate_deg_lo, cfg.rotate_deg_hi);
  const double scale = rng.uniform(cfg.scale_lo, cfg.scale_hi);
  auto box = visible_bbox(s.landmarks);
  if (!box) return s;
  const double cx = 0.5 * (box->x0 + box->x1), cy = 0.5 * (box->y0 + box->y1);
  Sample out = s;
  out.image = warp_similarity(s.image, cx, cy, angle, scale);
  const double th = angle * 3.14159265358979323846 / 180.0;
  const double c = std::cos(th), sn = std::sin(th);
  for (auto& p : out.landmarks.points) {
    const double dx = p.x - cx, dy = p.y - cy;
    p.x = cx + scale * (c * dx - sn * dy);
    p.y = cy + scale * (sn * dx + c * dy);
  }
  detail::mark_out_of_frame(out.landmarks, s.image.h, s.image.w);
  return out;
}

/// Each channel scaled by an independent factor, then clamped to [0,1].
inline Sample color_jitter(const Sample& s, const AugmentConfig& cfg, Rng& rng) {
  Sample out = s;
  for (std::size_t c = 0; c < s.image.channels; ++c) {
    const float f = static_cast<float>(rng.uniform(cfg.jitter_lo, cfg.jitter_hi));
    for (std::size_t y = 0; y < s.image.h; ++y)
      for (std::size_t x = 0; x < s.image.w; ++x)
        out.image.at(c, y, x) = std::clamp(s.image.at(c, y, x) * f, 0.0f, 1.0f);
  }
  return out;
}

/// One constant rectangle of area at most occlusion_max_area times the
/// visible-landmark bbox area; landmarks and visibility never change.
inline Sample random_occlusion(const Sample& s, const AugmentConfig& cfg, Rng& rng) {
  if (!rng.bernoulli(cfg.occlusion_prob)) return s;
  auto box = visible_bbox(s.landmarks);
  if (!box) return s;
  const double bbox_area = box->width() * box->height();
  const double area = rng.uniform(0.0, cfg.occlusion_max_area) * bbox_area;
  const double aspect = rng.uniform(0.5, 2.0);
  const double rw = std::sqrt(area * aspect), rh = area > 0.0 ? area / rw : 0.0;
  const double x0 = box->x0 + rng.uniform(0.0, std::max(0.0, box->width() - rw));
  const double y0 = box->y0 + rng.uniform(0.0, std::max(0.0, box->height() - rh));
  if (rw < 1.0 || rh < 1.0) return s;
  Sample out = s;
  const std::size_t xa = static_cast<std::size_t>(std::max(0.0, x0));
  const std::size_t ya = static_cast<std::size_t>(std::max(0.0, y0));
  const std::size_t xb = std::min(s.image.w, static_cast<std::size_t>(std::max(0.0, x0 + rw)));
  const std::size_t yb = std::min(s.image.h, static_cast<std::size_t>(std::max(0.0, y0 + rh)));
  for (std::size_t c = 0; c < s.image.channels; ++c)
    for (std::size_t y = ya; y < yb; ++y)
      for (std::size_t x = xa; x < xb; ++x) out.image.at(c, y, x) = cfg.occlusion_value;
  return out;
}

/// Full training-time menu in a fixed order: flip, rotate+scale, colour
/// jitter, occlusion. Deterministic given the rng state.
inline Sample augment(const Sample& s, const AugmentConfig& cfg, Rng& rng) {
  Sample out = random_flip(s, cfg, rng);
  out = random_rotate_scale(out, cfg, rng);
  out = color_jitter(out, cfg, rng);
  return random_occlusion(out, cfg, rng);
}

}  // namespace hgl
