#include "advtrack/proposals.hpp"

#include <algorithm>
#include <cmath>

namespace advtrack {

std::vector<BoundingBox> sample_proposals(const BoundingBox& center, int n,
                                          int frame_w, int frame_h, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_proposals: n must be >= 1");
  std::vector<BoundingBox> out;
  out.reserve(n);
  out.push_back(center);
  const double sigma = 0.3 * std::sqrt(center.w * center.h);
  for (int i = 1; i < n; ++i) {
    const double dx = rng.normal(0.0, sigma);
    const double dy = rng.normal(0.0, sigma);
    const double s = rng.log_uniform(1.0 / 1.3, 1.3);
    double w = std::min(center.w * s, static_cast<double>(frame_w));
    double h = std::min(center.h * s, static_cast<double>(frame_h));
    double x = std::clamp(center.cx() + dx - w / 2, 0.0, frame_w - w);
    double y = std::clamp(center.cy() + dy - h / 2, 0.0, frame_h - h);
    out.push_back({x, y, w, h});
  }
  return out;
}

std::vector<ClsLabel> assign_labels(const std::vector<BoundingBox>& boxes,
                                    const BoundingBox& reference) {
  if (boxes.empty()) throw std::invalid_argument("assign_labels: no proposals");
  std::vector<ClsLabel> labels;
  labels.reserve(boxes.size());
  bool any_usable = false;
  for (const BoundingBox& b : boxes) {
    const double v = iou(b, reference);
    ClsLabel l = ClsLabel::Ignore;
    if (v >= 0.7) l = ClsLabel::Target;
    else if (v <= 0.3) l = ClsLabel::Background;
    any_usable |= (l != ClsLabel::Ignore);
    labels.push_back(l);
  }
  if (!any_usable)
    throw LabelingError("assign_labels: all proposals fall in the ignore band");
  return labels;
}

std::vector<double> crop_resize(const Frame& frame, const BoundingBox& box, int P) {
  std::vector<double> crop(static_cast<std::size_t>(P) * P * frame.channels);
  const double max_u = frame.width - 1.0;
  const double max_v = frame.height - 1.0;
  std::size_t k = 0;
  for (int c = 0; c < frame.channels; ++c)
    for (int i = 0; i < P; ++i) {
      const double v = std::clamp(box.y + (i + 0.5) * box.h / P - 0.5, 0.0, max_v);
      const int y0 = std::min(static_cast<int>(v), frame.height - 2);
      const double ay = v - y0;
      for (int j = 0; j < P; ++j) {
        const double u = std::clamp(box.x + (j + 0.5) * box.w / P - 0.5, 0.0, max_u);
        const int x0 = std::min(static_cast<int>(u), frame.width - 2);
        const double ax = u - x0;
        crop[k++] = (1 - ay) * ((1 - ax) * frame.at(c, y0, x0) + ax * frame.at(c, y0, x0 + 1)) +
                    ay * ((1 - ax) * frame.at(c, y0 + 1, x0) + ax * frame.at(c, y0 + 1, x0 + 1));
      }
    }
  return crop;
}

void crop_resize_adjoint(const Frame& frame, const BoundingBox& box, int P,
                         const std::vector<double>& crop_grad, GradientField& pixel_grad) {
  const double max_u = frame.width - 1.0;
  const double max_v = frame.height - 1.0;
  std::size_t k = 0;
  for (int c = 0; c < frame.channels; ++c)
    for (int i = 0; i < P; ++i) {
      const double v = std::clamp(box.y + (i + 0.5) * box.h / P - 0.5, 0.0, max_v);
      const int y0 = std::min(static_cast<int>(v), frame.height - 2);
      const double ay = v - y0;
      for (int j = 0; j < P; ++j) {
        const double u = std::clamp(box.x + (j + 0.5) * box.w / P - 0.5, 0.0, max_u);
        const int x0 = std::min(static_cast<int>(u), frame.width - 2);
        const double ax = u - x0;
        const double g = crop_grad[k++];
        if (g == 0.0) continue;
        pixel_grad.at(c, y0, x0) += g * (1 - ay) * (1 - ax);
        pixel_grad.at(c, y0, x0 + 1) += g * (1 - ay) * ax;
        pixel_grad.at(c, y0 + 1, x0) += g * ay * (1 - ax);
        pixel_grad.at(c, y0 + 1, x0 + 1) += g * ay * ax;
      }
    }
}

LabeledProposals make_labeled(const Frame& frame, const std::vector<BoundingBox>& boxes,
                              const BoundingBox& reference, int P) {
  LabeledProposals lp;
  lp.labels = assign_labels(boxes, reference);
  lp.reg_target = reference;
  lp.proposals.reserve(boxes.size());
  for (const BoundingBox& b : boxes)
    lp.proposals.push_back({b, crop_resize(frame, b, P)});
  return lp;
}

}  // namespace advtrack
