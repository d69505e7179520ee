#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "hgl/tensor.hpp"

namespace hgl {

/// Planar channel-major raster, values in [0,1]. Pixel (x,y) means column
/// x, row y, origin at the top-left pixel centre.
struct Image {
  std::size_t channels = 0, h = 0, w = 0;
  std::vector<float> data;  // channels * h * w

  Image() = default;
  Image(std::size_t channels_, std::size_t h_, std::size_t w_, float fill = 0.0f)
      : channels(channels_), h(h_), w(w_), data(channels_ * h_ * w_, fill) {}

  float& at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * h + y) * w + x]; }
  float at(std::size_t c, std::size_t y, std::size_t x) const { return data[(c * h + y) * w + x]; }
};

/// Bilinear sample with zero fill outside the pixel grid.
inline float sample_bilinear(const Image& img, std::size_t c, double x, double y) {
  const double x0f = std::floor(x), y0f = std::floor(y);
  const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(x0f);
  const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(y0f);
  const double fx = x - x0f, fy = y - y0f;
  const double wgt[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  const std::ptrdiff_t xs[4] = {x0, x0 + 1, x0, x0 + 1};
  const std::ptrdiff_t ys[4] = {y0, y0, y0 + 1, y0 + 1};
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (xs[i] < 0 || ys[i] < 0 || xs[i] >= static_cast<std::ptrdiff_t>(img.w) ||
        ys[i] >= static_cast<std::ptrdiff_t>(img.h))
      continue;
    acc += wgt[i] * img.at(c, static_cast<std::size_t>(ys[i]), static_cast<std::size_t>(xs[i]));
  }
  return static_cast<float>(acc);
}

/// Similarity warp about `center`: output pixel p receives the input at
/// center + R(-angle)/scale * (p - center), i.e. the image content rotates
/// by +angle and grows by `scale`, matching the forward landmark transform
/// p' = center + scale * R(angle) * (p - center). y points down; a +90 deg
/// rotation takes (r,0) to (0,r).
inline Image warp_similarity(const Image& img, double cx, double cy, double angle_deg,
                             double scale) {
  const double th = angle_deg * 3.14159265358979323846 / 180.0;
  const double c = std::cos(th), s = std::sin(th);
  Image out(img.channels, img.h, img.w);
  for (std::size_t ch = 0; ch < img.channels; ++ch) {
    for (std::size_t y = 0; y < img.h; ++y) {
      for (std::size_t x = 0; x < img.w; ++x) {
        const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
        const double sx = cx + (c * dx + s * dy) / scale;
        const double sy = cy + (-s * dx + c * dy) / scale;
        out.at(ch, y, x) = sample_bilinear(img, ch, sx, sy);
      }
    }
  }
  return out;
}

inline std::uint8_t to_byte(float v) {
  const float clamped = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

/// Binary PPM (P6, maxval 255). Only 3-channel images round-trip.
inline void write_ppm(const std::string& path, const Image& img) {
  op_check(img.channels == 3, "write_ppm: expected 3 channels, got " +
                                  std::to_string(img.channels));
  std::ofstream out(path, std::ios::binary);
  op_check(static_cast<bool>(out), "write_ppm: cannot open " + path);
  out << "P6\n" << img.w << " " << img.h << "\n255\n";
  std::vector<std::uint8_t> row(img.w * 3);
  for (std::size_t y = 0; y < img.h; ++y) {
    for (std::size_t x = 0; x < img.w; ++x)
      for (std::size_t c = 0; c < 3; ++c) row[x * 3 + c] = to_byte(img.at(c, y, x));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  op_check(static_cast<bool>(out), "write_ppm: short write to " + path);
}

namespace detail {

inline int ppm_next_int(std::istream& in, const std::string& path) {
  // skip whitespace and # comments
  int ch = in.get();
  while (ch != EOF && (std::isspace(ch) || ch == '#')) {
    if (ch == '#')
      while (ch != EOF && ch != '\n') ch = in.get();
    ch = in.get();
  }
  op_check(ch != EOF && std::isdigit(ch), "read_ppm: malformed header in " + path);
  int value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    ch = in.get();
  }
  if (ch != EOF) in.unget();
  return value;
}

}  // namespace detail

inline Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  op_check(static_cast<bool>(in), "read_ppm: cannot open " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  op_check(m0 == 'P' && m1 == '6', "read_ppm: " + path + " is not a P6 PPM");
  const int w = detail::ppm_next_int(in, path);
  const int h = detail::ppm_next_int(in, path);
  const int maxval = detail::ppm_next_int(in, path);
  op_check(w >= 1 && h >= 1, "read_ppm: bad extent in " + path);
  op_check(maxval == 255, "read_ppm: unsupported maxval " + std::to_string(maxval) + " in " + path);
  in.get();  // single whitespace before raster
  Image img(3, static_cast<std::size_t>(h), static_cast<std::size_t>(w));
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    op_check(in.gcount() == static_cast<std::streamsize>(row.size()),
             "read_ppm: truncated raster in " + path);
    for (int x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        img.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
            static_cast<float>(row[static_cast<std::size_t>(x) * 3 + c]) / 255.0f;
  }
  return img;
}

/// Image to network input tensor (1,C,H,W).
template <typename T>
Tensor<T> image_to_tensor(const Image& img) {
  std::vector<T> data(img.data.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<T>(img.data[i]);
  return Tensor<T>::from_data({1, img.channels, img.h, img.w}, std::move(data));
}

}  // namespace hgl
