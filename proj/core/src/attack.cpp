#include "advtrack/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advtrack {

void validate_attack_config(const AttackConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("attack: epsilon must be > 0");
  if (cfg.iterations < 1) throw std::invalid_argument("attack: iterations must be >= 1");
  if (!(cfg.offset_scale >= 0.0)) throw std::invalid_argument("attack: bad offset range");
  if (!(cfg.scale_min > 0.0 && cfg.scale_max >= cfg.scale_min))
    throw std::invalid_argument("attack: bad scale range");
}

std::array<double, 2> make_pseudo_cls(const std::array<double, 2>& p_c) {
  return {p_c[1], p_c[0]};
}

BoundingBox make_pseudo_reg(const BoundingBox& p_r, const AttackConfig& cfg, Rng& rng) {
  const double span = cfg.offset_scale * std::max(p_r.w, p_r.h);
  const double offset = rng.uniform(-span, span);
  const double scale = rng.log_uniform(cfg.scale_min, cfg.scale_max);
  return {p_r.x + offset, p_r.y + offset, p_r.w * scale, p_r.h * scale};
}

PseudoLabels make_pseudo_labels(const LabeledProposals& lp, const AttackConfig& cfg,
                                Rng& rng) {
  PseudoLabels pl;
  pl.cls.reserve(lp.labels.size());
  for (ClsLabel l : lp.labels)
    pl.cls.push_back(l == ClsLabel::Ignore ? std::array<double, 2>{0.0, 0.0}
                                           : make_pseudo_cls(one_hot(l)));
  pl.reg = make_pseudo_reg(lp.reg_target, cfg, rng);
  return pl;
}

double adversarial_loss(const TrackerModel& model, const LabeledProposals& lp,
                        const PseudoLabels& pl, double lambda,
                        BranchMask branches) {
  if (pl.cls.size() != lp.labels.size())
    throw std::invalid_argument("adversarial_loss: pseudo labels not aligned");
  const auto outputs = forward(model, lp.proposals);
  double cls_diff = 0.0, reg_diff = 0.0;
  for (std::size_t n = 0; n < lp.proposals.size(); ++n) {
    const ClsLabel label = lp.labels[n];
    if (label == ClsLabel::Ignore) continue;
    if (branches != BranchMask::RegOnly) {
      const ClsLabel pseudo = pl.cls[n][0] >= pl.cls[n][1] ? ClsLabel::Target
                                                           : ClsLabel::Background;
      cls_diff += softmax_ce(outputs[n].logits, label) -
                  softmax_ce(outputs[n].logits, pseudo);
    }
    if (branches != BranchMask::ClsOnly && label == ClsLabel::Target && model.reg_enabled) {
      const auto target = encode_reg(lp.reg_target, lp.proposals[n].box);
      const auto pseudo = encode_reg(pl.reg, lp.proposals[n].box);
      reg_diff += smooth_l1(outputs[n].reg, target) - smooth_l1(outputs[n].reg, pseudo);
    }
  }
  return cls_diff + lambda * reg_diff;
}

Frame attack_step(const Frame& frame, const GradientField& r, double alpha) {
  if (!frame.same_shape(r)) throw std::invalid_argument("attack_step: shape mismatch");
  Frame out = frame;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double g = r.data[i];
    if (g > 0.0) out.data[i] = clamp255(out.data[i] + alpha);
    else if (g < 0.0) out.data[i] = clamp255(out.data[i] - alpha);
  }
  return out;
}

namespace {

LabeledProposals resample_labeled(const TrackerModel& model, const Frame& frame,
                                  const BoundingBox& reference, int n, Rng& rng) {
  for (int attempt = 0;; ++attempt) {
    const auto boxes = sample_proposals(reference, n, frame.width, frame.height, rng);
    try {
      return make_labeled(frame, boxes, reference, model.P);
    } catch (const LabelingError&) {
      if (attempt >= 9) throw;
    }
  }
}

// Project every pixel of `f` into [ref - eps, ref + eps] (then [0,255]).
void project_linf(Frame& f, const Frame& ref, double eps) {
  for (std::size_t i = 0; i < f.data.size(); ++i)
    f.data[i] = clamp255(std::clamp(f.data[i], ref.data[i] - eps, ref.data[i] + eps));
}

}  // namespace

Frame attack_frame(const TrackerModel& model, const Frame& frame,
                   const BoundingBox& prev_location, const AttackConfig& cfg,
                   const TrackConfig& track_cfg, Rng& rng) {
  validate_attack_config(cfg);
  const double alpha = cfg.alpha();
  Frame current = frame;
  PseudoLabels pl;
  bool have_pl = false;
  for (int m = 0; m < cfg.iterations; ++m) {
    const LabeledProposals lp =
        resample_labeled(model, current, prev_location, track_cfg.n_proposals, rng);
    if (cfg.redraw_pseudo_each_iteration || !have_pl) {
      pl = make_pseudo_labels(lp, cfg, rng);
      have_pl = true;
    } else {
      // keep the frame's first pseudo regression box; class pairs re-derive
      pl.cls.assign(lp.labels.size(), {});
      for (std::size_t i = 0; i < lp.labels.size(); ++i)
        if (lp.labels[i] != ClsLabel::Ignore) pl.cls[i] = make_pseudo_cls(one_hot(lp.labels[i]));
    }
    const LossSpec spec = LossSpec::adversarial(pl.reg, cfg.branches);
    const GradientField r = input_gradient(model, current, lp, spec);
    current = attack_step(current, r, alpha);
    // alpha * iterations can overshoot epsilon by rounding when eps/M is not
    // exactly representable; keep the budget exact.
    project_linf(current, frame, cfg.epsilon);
  }
  return current;
}

Frame temporal_init_attack(const Frame& frame, const Frame& prev_first,
                           const Frame& prev_last) {
  if (!frame.same_shape(prev_first) || !frame.same_shape(prev_last))
    throw std::invalid_argument("temporal_init_attack: shape mismatch");
  Frame out = frame;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = clamp255(out.data[i] + (prev_last.data[i] - prev_first.data[i]));
  return out;
}

AttackRunResult attack_sequence(const TrackerModel& model, const Sequence& seq,
                                const AttackConfig& cfg, const TrackConfig& track_cfg,
                                Rng& rng) {
  validate_attack_config(cfg);
  if (cfg.branches == BranchMask::RegOnly && !model.reg_enabled)
    throw std::invalid_argument(
        "attack_sequence: regression-only attack on a classification-only model");

  AttackRunResult res;
  res.attacked.name = seq.name;
  res.attacked.frames.reserve(seq.frames.size());
  res.attacked.groundtruth = seq.groundtruth;
  res.attacked.frames.push_back(seq.frames.front());

  TrackerModel current_model = model;
  TrackState state{seq.groundtruth.front(), 1};
  res.trajectory.push_back(state.location);

  Frame prev_first, prev_last;
  for (int t = 1; t < seq.length(); ++t) {
    Frame first = seq.frames[t];
    if (cfg.temporal_transfer && t > 1)
      first = temporal_init_attack(first, prev_first, prev_last);
    Frame last = attack_frame(current_model, first, state.location, cfg, track_cfg, rng);
    if (cfg.global_budget_clamp) project_linf(last, seq.frames[t], cfg.epsilon);

    state = track_step(current_model, last, state, track_cfg.n_proposals, rng);
    res.trajectory.push_back(state.location);
    if (track_cfg.online_update && track_cfg.update_every > 0 &&
        t % track_cfg.update_every == 0)
      current_model = online_update(current_model, last, state.location,
                                    track_cfg.update_steps, track_cfg.update_lr,
                                    track_cfg.train_batch, rng)
                          .model;

    res.attacked.frames.push_back(last);
    prev_first = std::move(first);
    prev_last = res.attacked.frames.back();
  }
  return res;
}

}  // namespace advtrack
