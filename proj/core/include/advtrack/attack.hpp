#pragma once

#include <cstdint>
#include <vector>

#include "advtrack/model.hpp"
#include "advtrack/sequence.hpp"
#include "advtrack/tracker.hpp"

namespace advtrack {

/// Intentionally wrong labels used to build the adversarial loss: the class
/// pair of every proposal reversed, plus one offset/rescaled regression box.
struct PseudoLabels {
  std::vector<std::array<double, 2>> cls;
  BoundingBox reg;
};

struct AttackConfig {
  double epsilon = 10.0;  // max perturbation, gray levels
  int iterations = 10;    // M
  double lambda = 1.0;    // weight of the regression difference
  BranchMask branches = BranchMask::Both;
  bool temporal_transfer = true;
  bool redraw_pseudo_each_iteration = true;  // else one draw per frame
  bool global_budget_clamp = false;  // keep the cumulative deviation within epsilon
  double offset_scale = 0.5;         // delta_offset ~ U(+-offset_scale * max(w, h))
  double scale_min = 1.0 / 3.0;      // delta_scale ~ log-uniform in [scale_min, scale_max]
  double scale_max = 3.0;
  std::uint64_t seed = 0;

  double alpha() const { return epsilon / iterations; }
};

void validate_attack_config(const AttackConfig& cfg);

/// Reverse the elements of a classification label pair.
std::array<double, 2> make_pseudo_cls(const std::array<double, 2>& p_c);

/// Offset/rescale a regression label: one distance offset applied to x and y,
/// one scale applied to w and h.
BoundingBox make_pseudo_reg(const BoundingBox& p_r, const AttackConfig& cfg, Rng& rng);

/// Pseudo labels for a whole labeled batch (class pairs reversed; ignored
/// proposals keep a zero pair placeholder).
PseudoLabels make_pseudo_labels(const LabeledProposals& lp, const AttackConfig& cfg,
                                Rng& rng);

/// Signed difference between losses under correct and pseudo labels:
/// sum over proposals of [L_c(p_c) - L_c(p*_c)] + lambda * [L_r(p_r) - L_r(p*_r)].
/// The regression difference is dropped when the model has no regression
/// branch. `branches` restricts the sum to one branch.
double adversarial_loss(const TrackerModel& model, const LabeledProposals& lp,
                        const PseudoLabels& pl, double lambda,
                        BranchMask branches = BranchMask::Both);

/// One sign-gradient step: clamp_[0,255](frame + alpha * sign(r)).
Frame attack_step(const Frame& frame, const GradientField& r, double alpha);

/// M iterations of: resample proposals around `prev_location`, draw pseudo
/// labels, take the adversarial-loss input gradient, apply attack_step.
/// Guarantees ||out - frame||_inf <= epsilon.
Frame attack_frame(const TrackerModel& model, const Frame& frame,
                   const BoundingBox& prev_location, const AttackConfig& cfg,
                   const TrackConfig& track_cfg, Rng& rng);

/// Carry the previous frame's accumulated perturbation into this frame:
/// clamp_[0,255](frame + (prev_last - prev_first)).
Frame temporal_init_attack(const Frame& frame, const Frame& prev_first,
                           const Frame& prev_last);

struct AttackRunResult {
  Sequence attacked;                 // frame 1 untouched
  std::vector<BoundingBox> trajectory;  // victim tracker's own estimates
};

/// Frame-by-frame adversarial example generation interleaved with tracking:
/// for t = 2..T carry in the previous perturbation (t > 2, when enabled),
/// attack around the victim's own previous estimate, then track on the
/// attacked frame. Online updates, when enabled, run on attacked frames
/// after prediction.
AttackRunResult attack_sequence(const TrackerModel& model, const Sequence& seq,
                                const AttackConfig& cfg, const TrackConfig& track_cfg,
                                Rng& rng);

}  // namespace advtrack
