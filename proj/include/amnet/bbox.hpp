#pragma once

#include <cmath>

namespace amnet {

/// Axis-aligned box: top-left corner and size in image pixels.
struct BBox {
  double x = 0, y = 0, w = 0, h = 0;

  [[nodiscard]] double cx() const { return x + w / 2.0; }
  [[nodiscard]] double cy() const { return y + h / 2.0; }
  [[nodiscard]] bool valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0 &&
           h > 0;
  }
  [[nodiscard]] static BBox centered(double cx, double cy, double w, double h) {
    return {cx - w / 2.0, cy - h / 2.0, w, h};
  }
  bool operator==(const BBox&) const = default;
};

}  // namespace amnet
