#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hgl/tensor.hpp"

namespace hgl {

/// Coordinate convention, used everywhere: x = column, y = row, origin at
/// the top-left cell centre. z (depth) shares the pixel unit of x and y.
struct Landmark {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct LandmarkSet {
  std::vector<Landmark> points;
  std::vector<std::uint8_t> visibility;  // parallel to points
  std::string scheme;

  std::size_t size() const { return points.size(); }
  bool visible(std::size_t i) const { return visibility[i] != 0; }
};

inline void validate(const LandmarkSet& s) {
  op_check(s.points.size() == s.visibility.size(),
           "landmark set: " + std::to_string(s.points.size()) + " points vs " +
               std::to_string(s.visibility.size()) + " visibility flags");
}

struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// Tight box over visible points; empty when nothing is visible.
inline std::optional<Box> visible_bbox(const LandmarkSet& s) {
  std::optional<Box> box;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.visible(i)) continue;
    const auto& p = s.points[i];
    if (!box) {
      box = Box{p.x, p.y, p.x, p.y};
    } else {
      box->x0 = std::min(box->x0, p.x);
      box->y0 = std::min(box->y0, p.y);
      box->x1 = std::max(box->x1, p.x);
      box->y1 = std::max(box->y1, p.y);
    }
  }
  return box;
}

}  // namespace hgl
