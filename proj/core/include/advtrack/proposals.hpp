#pragma once

#include <stdexcept>
#include <vector>

#include "advtrack/frame.hpp"
#include "advtrack/geometry.hpp"
#include "advtrack/rng.hpp"

namespace advtrack {

/// Candidate box plus its resampled patch. The crop is P x P x C in the
/// frame's raw gray levels, channel-outermost row-major.
struct Proposal {
  BoundingBox box;
  std::vector<double> crop;
};

enum class ClsLabel { Target, Background, Ignore };

/// One-hot (target, background) pair for a non-ignore label.
inline std::array<double, 2> one_hot(ClsLabel l) {
  return l == ClsLabel::Target ? std::array<double, 2>{1.0, 0.0}
                               : std::array<double, 2>{0.0, 1.0};
}

struct LabeledProposals {
  std::vector<Proposal> proposals;
  std::vector<ClsLabel> labels;
  BoundingBox reg_target;  // the reference location the labels were assigned against
};

/// Raised when a labeling has no usable (non-ignore) proposal; callers
/// resample.
struct LabelingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// n boxes around `center`: the center itself first, then Gaussian
/// translations (std 0.3 * sqrt(w*h)) with a shared log-uniform scale in
/// [1/1.3, 1.3] per box, clipped to the frame.
std::vector<BoundingBox> sample_proposals(const BoundingBox& center, int n,
                                          int frame_w, int frame_h, Rng& rng);

/// IoU >= 0.7 -> Target, <= 0.3 -> Background, otherwise Ignore.
/// Throws LabelingError when every proposal lands in the ignore band.
std::vector<ClsLabel> assign_labels(const std::vector<BoundingBox>& boxes,
                                    const BoundingBox& reference);

/// Bilinear resample of `box` to a P x P patch per channel. Sample points sit
/// at the P x P grid of subpixel centers spanning the box; out-of-frame
/// samples clamp to the edge. Linear in the frame pixels for a fixed box.
std::vector<double> crop_resize(const Frame& frame, const BoundingBox& box, int P);

/// Adjoint of crop_resize: scatter-adds d(loss)/d(crop) into d(loss)/d(pixels).
void crop_resize_adjoint(const Frame& frame, const BoundingBox& box, int P,
                         const std::vector<double>& crop_grad, GradientField& pixel_grad);

/// Crops + labels against `reference` in one go.
LabeledProposals make_labeled(const Frame& frame, const std::vector<BoundingBox>& boxes,
                              const BoundingBox& reference, int P);

}  // namespace advtrack
