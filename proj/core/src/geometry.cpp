#include "advtrack/geometry.hpp"

#include <algorithm>

namespace advtrack {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double center_error(const BoundingBox& a, const BoundingBox& b) {
  const double dx = a.cx() - b.cx();
  const double dy = a.cy() - b.cy();
  return std::sqrt(dx * dx + dy * dy);
}

std::array<double, 4> encode_reg(const BoundingBox& box, const BoundingBox& anchor) {
  return {(box.cx() - anchor.cx()) / anchor.w,
          (box.cy() - anchor.cy()) / anchor.h,
          std::log(box.w / anchor.w),
          std::log(box.h / anchor.h)};
}

BoundingBox decode_reg(const std::array<double, 4>& t, const BoundingBox& anchor) {
  const double w = anchor.w * std::exp(t[2]);
  const double h = anchor.h * std::exp(t[3]);
  return BoundingBox::from_center(anchor.cx() + t[0] * anchor.w,
                                  anchor.cy() + t[1] * anchor.h, w, h);
}

}  // namespace advtrack
