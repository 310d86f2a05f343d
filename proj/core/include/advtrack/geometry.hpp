#pragma once

#include <array>
#include <cmath>

namespace advtrack {

/// Axis-aligned box, (x, y) = left/top edge in pixels, w/h > 0.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }

  static BoundingBox from_center(double cx, double cy, double w, double h) {
    return {cx - 0.5 * w, cy - 0.5 * h, w, h};
  }

  bool valid() const {
    return w > 0.0 && h > 0.0 && std::isfinite(x) && std::isfinite(y) &&
           std::isfinite(w) && std::isfinite(h);
  }

  bool operator==(const BoundingBox&) const = default;
};

/// Intersection-over-union of two boxes with positive area.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Euclidean distance between box centers.
double center_error(const BoundingBox& a, const BoundingBox& b);

/// Anchor-relative offsets (tx, ty, tw, th) in center coordinates:
/// tx = (cx_b - cx_a) / w_a, tw = ln(w_b / w_a), etc.
std::array<double, 4> encode_reg(const BoundingBox& box, const BoundingBox& anchor);

/// Exact inverse of encode_reg.
BoundingBox decode_reg(const std::array<double, 4>& offsets, const BoundingBox& anchor);

}  // namespace advtrack
