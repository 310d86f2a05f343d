#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "advtrack/geometry.hpp"

namespace advtrack {

/// A C-channel pixel grid. Pixel values of a displayable frame lie in
/// [0, 255]; storage is channel-outermost, row-major.
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Frame() = default;
  Frame(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t index(int c, int r, int col) const {
    return (static_cast<std::size_t>(c) * height + r) * width + col;
  }
  double& at(int c, int r, int col) { return data[index(c, r, col)]; }
  double at(int c, int r, int col) const { return data[index(c, r, col)]; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Frame& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
  BoundingBox rect() const {
    return {0.0, 0.0, static_cast<double>(width), static_cast<double>(height)};
  }

  bool operator==(const Frame&) const = default;
};

/// Per-pixel real field with the same shape as a Frame; values unbounded.
using GradientField = Frame;

inline double clamp255(double v) { return v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v); }

/// Throws std::invalid_argument unless the frame is a valid image:
/// width/height >= 32, 1 or 3 channels, all pixels in [0, 255].
void validate_frame(const Frame& f, const std::string& what = "frame");

/// Max over pixels of |a - b|. Shapes must match.
double linf_distance(const Frame& a, const Frame& b);

/// Sqrt of sum of squared pixel differences. Shapes must match.
double l2_distance(const Frame& a, const Frame& b);

}  // namespace advtrack
