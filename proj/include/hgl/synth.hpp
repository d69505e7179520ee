#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "hgl/augment.hpp"
#include "hgl/heatmap.hpp"
#include "hgl/image.hpp"
#include "hgl/manifest.hpp"
#include "hgl/rng.hpp"
#include "hgl/scheme.hpp"

namespace hgl::synth {

/// Maximum displacements at asymmetry 1, as fractions of the face radii.
/// The affected (image-right) eye and mouth corner droop down and drift
/// outward proportionally to the asymmetry parameter.
inline constexpr double kEyeMaxDroop = 0.12;        // of ry, both right-eye corners
inline constexpr double kEyeOuterMaxOut = 0.05;     // of rx, outer right-eye corner
inline constexpr double kMouthCornerMaxDroop = 0.18;  // of ry, right mouth corner
inline constexpr double kMouthCornerMaxOut = 0.06;    // of rx, right mouth corner

inline SchemeFile synth12_scheme() {
  SchemeFile s;
  s.id = "synth12";
  s.m = 12;
  s.names = {"eye_l_outer", "eye_l_inner", "eye_r_inner", "eye_r_outer",
             "nose_bridge", "nose_tip",    "mouth_l",     "mouth_top_l",
             "mouth_top_r", "mouth_r",     "mouth_bot_r", "mouth_bot_l"};
  s.flip_swap_map = {{0, 3}, {1, 2}, {6, 9}, {7, 8}, {10, 11}};
  validate(s);
  return s;
}

namespace detail {

struct Rgb {
  float r, g, b;
};

inline void put_px(Image& img, std::ptrdiff_t x, std::ptrdiff_t y, Rgb c) {
  if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(img.w) ||
      y >= static_cast<std::ptrdiff_t>(img.h))
    return;
  img.at(0, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = c.r;
  img.at(1, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = c.g;
  img.at(2, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = c.b;
}

inline void stamp(Image& img, double x, double y, double radius, Rgb c) {
  const auto lo_x = static_cast<std::ptrdiff_t>(std::floor(x - radius));
  const auto hi_x = static_cast<std::ptrdiff_t>(std::ceil(x + radius));
  const auto lo_y = static_cast<std::ptrdiff_t>(std::floor(y - radius));
  const auto hi_y = static_cast<std::ptrdiff_t>(std::ceil(y + radius));
  for (std::ptrdiff_t py = lo_y; py <= hi_y; ++py)
    for (std::ptrdiff_t px = lo_x; px <= hi_x; ++px) {
      const double dx = static_cast<double>(px) - x, dy = static_cast<double>(py) - y;
      if (dx * dx + dy * dy <= radius * radius) put_px(img, px, py, c);
    }
}

inline void draw_segment(Image& img, double x0, double y0, double x1, double y1,
                         double radius, Rgb c) {
  const double len = std::hypot(x1 - x0, y1 - y0);
  const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.3)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    stamp(img, x0 + t * (x1 - x0), y0 + t * (y1 - y0), radius, c);
  }
}

inline void fill_ellipse(Image& img, double cx, double cy, double rx, double ry, Rgb c) {
  const auto lo_x = static_cast<std::ptrdiff_t>(std::floor(cx - rx));
  const auto hi_x = static_cast<std::ptrdiff_t>(std::ceil(cx + rx));
  const auto lo_y = static_cast<std::ptrdiff_t>(std::floor(cy - ry));
  const auto hi_y = static_cast<std::ptrdiff_t>(std::ceil(cy + ry));
  for (std::ptrdiff_t py = lo_y; py <= hi_y; ++py)
    for (std::ptrdiff_t px = lo_x; px <= hi_x; ++px) {
      const double nx = (static_cast<double>(px) - cx) / rx;
      const double ny = (static_cast<double>(py) - cy) / ry;
      if (nx * nx + ny * ny <= 1.0) put_px(img, px, py, c);
    }
}

inline void ellipse_outline(Image& img, double cx, double cy, double rx, double ry,
                            double band_px, Rgb c) {
  for (std::size_t py = 0; py < img.h; ++py)
    for (std::size_t px = 0; px < img.w; ++px) {
      const double nx = (static_cast<double>(px) - cx) / rx;
      const double ny = (static_cast<double>(py) - cy) / ry;
      const double q = nx * nx + ny * ny;
      // Half-width of the band in q units, for roughly band_px thickness.
      if (std::abs(q - 1.0) <= 2.0 * band_px / std::min(rx, ry)) put_px(img, px, py, c);
    }
}

}  // namespace detail

/// Face ellipse placement drawn for one sample, reported for callers that
/// need displacement magnitudes in absolute pixels.
struct FaceGeometry {
  double cx = 0.0, cy = 0.0, rx = 0.0, ry = 0.0;
};

/// One parametric face. Per-sample shape variation is drawn symmetrically,
/// so at asymmetry 0 the landmark set mirrors exactly about x = cx; the
/// asymmetry parameter droops the image-right eye and mouth corner by the
/// constants above. All twelve landmarks land on drawn features, and depth
/// follows a fixed per-landmark relief profile scaled by the face radius.
inline Sample synth_sample(Extent image, double asymmetry, Rng& rng,
                           FaceGeometry* geom = nullptr) {
  op_check(image.h >= 32 && image.w >= 32, "synth: image extent too small");
  op_check(asymmetry >= 0.0 && asymmetry <= 1.0, "synth: asymmetry must be in [0,1]");
  const double w = static_cast<double>(image.w), h = static_cast<double>(image.h);
  const double cx = w / 2.0 + rng.uniform(-0.03, 0.03) * w;
  const double cy = h / 2.0 + rng.uniform(-0.03, 0.03) * h;
  const double rx = rng.uniform(0.30, 0.36) * w;
  const double ry = rng.uniform(0.34, 0.40) * h;
  const double eye_y = cy - 0.30 * ry;
  const double eye_inner = rng.uniform(0.16, 0.20) * rx;
  const double eye_outer = rng.uniform(0.50, 0.60) * rx;
  const double mouth_y = cy + rng.uniform(0.50, 0.58) * ry;
  const double mouth_half = rng.uniform(0.38, 0.46) * rx;
  if (geom) *geom = {cx, cy, rx, ry};

  const double eye_droop = asymmetry * kEyeMaxDroop * ry;
  const double eye_out = asymmetry * kEyeOuterMaxOut * rx;
  const double mouth_droop = asymmetry * kMouthCornerMaxDroop * ry;
  const double mouth_out = asymmetry * kMouthCornerMaxOut * rx;

  Sample s;
  s.landmarks.scheme = "synth12";
  s.landmarks.visibility.assign(12, 1);
  auto& p = s.landmarks.points;
  p.resize(12);
  p[0] = {cx - eye_outer, eye_y, 0.0};
  p[1] = {cx - eye_inner, eye_y, 0.0};
  p[2] = {cx + eye_inner, eye_y + eye_droop, 0.0};
  p[3] = {cx + eye_outer + eye_out, eye_y + eye_droop, 0.0};
  p[4] = {cx, cy - 0.05 * ry, 0.0};
  p[5] = {cx, cy + 0.18 * ry, 0.0};
  p[6] = {cx - mouth_half, mouth_y, 0.0};
  p[7] = {cx - 0.5 * mouth_half, mouth_y - 0.08 * ry, 0.0};
  p[8] = {cx + 0.5 * mouth_half, mouth_y - 0.08 * ry, 0.0};
  p[9] = {cx + mouth_half + mouth_out, mouth_y + mouth_droop, 0.0};
  p[10] = {cx + 0.5 * mouth_half, mouth_y + 0.10 * ry, 0.0};
  p[11] = {cx - 0.5 * mouth_half, mouth_y + 0.10 * ry, 0.0};
  static constexpr double kRelief[12] = {0.04, 0.08, 0.08, 0.04, 0.18, 0.30,
                                         0.10, 0.14, 0.14, 0.10, 0.12, 0.12};
  for (int i = 0; i < 12; ++i) p[i].z = kRelief[i] * rx;

  s.image = Image(3, image.h, image.w);
  const detail::Rgb bg{0.82f, 0.80f, 0.78f}, skin{0.95f, 0.85f, 0.75f},
      outline{0.35f, 0.25f, 0.20f}, eye{0.12f, 0.10f, 0.25f}, nose{0.45f, 0.30f, 0.20f},
      mouth{0.55f, 0.15f, 0.18f};
  for (std::size_t y = 0; y < image.h; ++y)
    for (std::size_t x = 0; x < image.w; ++x) detail::put_px(s.image, x, y, bg);
  detail::fill_ellipse(s.image, cx, cy, rx, ry, skin);
  detail::ellipse_outline(s.image, cx, cy, rx, ry, 1.5, outline);
  for (auto [a, b] : {std::pair<int, int>{0, 1}, {2, 3}}) {
    const double ex = (p[a].x + p[b].x) / 2.0, ey = (p[a].y + p[b].y) / 2.0;
    const double semi_x = std::abs(p[b].x - p[a].x) / 2.0;
    detail::fill_ellipse(s.image, ex, ey, semi_x + 1.5, 0.45 * semi_x + 1.5, eye);
  }
  detail::draw_segment(s.image, p[4].x, p[4].y, p[5].x, p[5].y, 1.5, nose);
  const int ring[7] = {6, 7, 8, 9, 10, 11, 6};
  for (int i = 0; i < 6; ++i)
    detail::draw_segment(s.image, p[ring[i]].x, p[ring[i]].y, p[ring[i + 1]].x,
                         p[ring[i + 1]].y, 1.5, mouth);
  return s;
}

/// Sample i depends only on (seed, i), not on count.
inline std::vector<Sample> synth_samples(std::size_t count, Extent image, double asymmetry,
                                         std::uint64_t seed) {
  op_check(count >= 1, "synth: count must be >= 1");
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(seed, "synth." + std::to_string(i));
    out.push_back(synth_sample(image, asymmetry, rng));
  }
  return out;
}

struct SynthCorpus {
  std::string manifest_path;
  std::string scheme_path;
  std::vector<std::string> image_paths;
};

/// Writes images, a line-delimited manifest, and the scheme file into
/// out_dir. Byte-identical for identical arguments.
inline SynthCorpus synth_generate(std::size_t count, Extent image, double asymmetry,
                                  std::uint64_t seed, const std::string& out_dir) {
  const auto samples = synth_samples(count, image, asymmetry, seed);
  std::filesystem::create_directories(out_dir);
  const auto base = std::filesystem::path(out_dir);
  SynthCorpus corpus;
  std::vector<ManifestRecord> records;
  for (std::size_t i = 0; i < count; ++i) {
    std::ostringstream name;
    name << "face_" << std::setw(4) << std::setfill('0') << i << ".ppm";
    const auto img_path = base / name.str();
    write_ppm(img_path.string(), samples[i].image);
    corpus.image_paths.push_back(img_path.string());
    ManifestRecord r;
    r.image = name.str();
    r.landmarks = samples[i].landmarks;
    const auto box = visible_bbox(samples[i].landmarks);
    r.bbox = box;
    records.push_back(std::move(r));
  }
  corpus.manifest_path = (base / "manifest.jsonl").string();
  save_manifest(corpus.manifest_path, records);
  corpus.scheme_path = (base / "scheme.json").string();
  save_scheme(corpus.scheme_path, synth12_scheme());
  return corpus;
}

}  // namespace hgl::synth
