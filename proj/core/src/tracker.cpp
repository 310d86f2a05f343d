#include "advtrack/tracker.hpp"

#include <algorithm>
#include <stdexcept>

namespace advtrack {

namespace {

LabeledProposals sample_labeled(const Frame& frame, const BoundingBox& reference,
                                int n, int P, Rng& rng) {
  for (int attempt = 0;; ++attempt) {
    const auto boxes = sample_proposals(reference, n, frame.width, frame.height, rng);
    try {
      return make_labeled(frame, boxes, reference, P);
    } catch (const LabelingError&) {
      if (attempt >= 9) throw;
    }
  }
}

TrainResult fit(const TrackerModel& model, const Frame& frame,
                const BoundingBox& reference, int steps, double lr, int batch,
                Rng& rng) {
  if (steps < 0) throw std::invalid_argument("fit: steps must be >= 0");
  if (batch < 1) throw std::invalid_argument("fit: batch must be >= 1");
  TrainResult res{model, {}};
  res.losses.reserve(steps);
  for (int s = 0; s < steps; ++s) {
    const LabeledProposals lp = sample_labeled(frame, reference, batch, model.P, rng);
    res.losses.push_back(total_loss(res.model, lp).total);
    if (lr != 0.0) {
      const ParamGrads g = param_gradient(res.model, lp);
      sgd_step(res.model, g, lr, 1.0 / batch);
    }
  }
  return res;
}

// Keep a regressed box usable: positive size, center inside the frame.
BoundingBox sanitize(const BoundingBox& b, const Frame& frame) {
  const double w = std::clamp(b.w, 1.0, 2.0 * frame.width);
  const double h = std::clamp(b.h, 1.0, 2.0 * frame.height);
  const double cx = std::clamp(b.cx(), 0.0, static_cast<double>(frame.width));
  const double cy = std::clamp(b.cy(), 0.0, static_cast<double>(frame.height));
  return BoundingBox::from_center(cx, cy, w, h);
}

}  // namespace

TrainResult train_init(const TrackerModel& model, const Frame& frame1,
                       const BoundingBox& gt, int steps, double lr, int batch,
                       Rng& rng) {
  if (steps < 1) throw std::invalid_argument("train_init: steps must be >= 1");
  return fit(model, frame1, gt, steps, lr, batch, rng);
}

TrainResult online_update(const TrackerModel& model, const Frame& frame,
                          const BoundingBox& predicted, int steps, double lr,
                          int batch, Rng& rng) {
  return fit(model, frame, predicted, steps, lr, batch, rng);
}

TrackState track_step(const TrackerModel& model, const Frame& frame,
                      const TrackState& prev, int n_proposals, Rng& rng) {
  if (!prev.location.valid())
    throw std::invalid_argument("track_step: previous location is degenerate");
  const auto boxes = sample_proposals(prev.location, n_proposals, frame.width,
                                      frame.height, rng);
  std::vector<Proposal> proposals;
  proposals.reserve(boxes.size());
  for (const BoundingBox& b : boxes) proposals.push_back({b, crop_resize(frame, b, model.P)});
  const auto outputs = forward(model, proposals);

  std::size_t best = 0;
  for (std::size_t i = 1; i < outputs.size(); ++i)
    if (outputs[i].logits[0] > outputs[best].logits[0]) best = i;

  BoundingBox chosen = boxes[best];
  if (model.reg_enabled)
    chosen = sanitize(decode_reg(outputs[best].reg, chosen), frame);
  return {chosen, prev.frame_index + 1};
}

std::vector<BoundingBox> track_sequence(const TrackerModel& model, const Sequence& seq,
                                        const TrackConfig& cfg, Rng& rng,
                                        TrackerModel* final_model) {
  TrackerModel current = model;
  TrackState state{seq.groundtruth.front(), 1};
  std::vector<BoundingBox> traj;
  traj.reserve(seq.frames.size());
  traj.push_back(state.location);
  for (int t = 1; t < seq.length(); ++t) {
    state = track_step(current, seq.frames[t], state, cfg.n_proposals, rng);
    traj.push_back(state.location);
    if (cfg.online_update && cfg.update_every > 0 && t % cfg.update_every == 0)
      current = online_update(current, seq.frames[t], state.location,
                              cfg.update_steps, cfg.update_lr, cfg.train_batch, rng)
                    .model;
  }
  if (final_model) *final_model = std::move(current);
  return traj;
}

}  // namespace advtrack
