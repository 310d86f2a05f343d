#include "advtrack/frame.hpp"

#include <cmath>
#include <stdexcept>

namespace advtrack {

void validate_frame(const Frame& f, const std::string& what) {
  if (f.width < 32 || f.height < 32)
    throw std::invalid_argument(what + ": frame must be at least 32x32, got " +
                                std::to_string(f.width) + "x" + std::to_string(f.height));
  if (f.channels != 1 && f.channels != 3)
    throw std::invalid_argument(what + ": channels must be 1 or 3, got " +
                                std::to_string(f.channels));
  if (f.data.size() != static_cast<std::size_t>(f.width) * f.height * f.channels)
    throw std::invalid_argument(what + ": pixel buffer size does not match shape");
  for (double v : f.data)
    if (!(v >= 0.0 && v <= 255.0))
      throw std::invalid_argument(what + ": pixel value " + std::to_string(v) +
                                  " outside [0,255]");
}

double linf_distance(const Frame& a, const Frame& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("linf_distance: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

double l2_distance(const Frame& a, const Frame& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("l2_distance: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace advtrack
