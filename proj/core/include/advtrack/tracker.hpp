#pragma once

#include <vector>

#include "advtrack/model.hpp"
#include "advtrack/sequence.hpp"

namespace advtrack {

struct TrackState {
  BoundingBox location;
  int frame_index = 1;  // 1-based
};

/// Runtime knobs shared by tracking, training and the attack/defense loops.
struct TrackConfig {
  int n_proposals = 256;   // proposals per tracking / attack / defense step
  int train_batch = 64;    // proposals per training step
  int train_steps = 200;
  double train_lr = 1e-3;
  bool online_update = false;  // refresh the model during tracking
  int update_every = 10;       // frames between online updates
  int update_steps = 15;
  double update_lr = 1e-3;
};

struct TrainResult {
  TrackerModel model;
  std::vector<double> losses;  // composite loss per step, before the update
};

/// First-frame fit: SGD on the composite loss over freshly sampled labeled
/// proposals each step. Labeling that degenerates is resampled up to 10
/// times before the error propagates.
TrainResult train_init(const TrackerModel& model, const Frame& frame1,
                       const BoundingBox& gt, int steps, double lr, int batch,
                       Rng& rng);

/// Same SGD as train_init but labeled against the tracker's own prediction.
TrainResult online_update(const TrackerModel& model, const Frame& frame,
                          const BoundingBox& predicted, int steps, double lr,
                          int batch, Rng& rng);

/// One tracking-by-detection step: sample proposals around the previous
/// location, pick the highest target score, refine through the regression
/// head when enabled.
TrackState track_step(const TrackerModel& model, const Frame& frame,
                      const TrackState& prev, int n_proposals, Rng& rng);

/// Plain one-pass tracking from the groundtruth of frame 1. Returns one box
/// per frame (frame 1 is the groundtruth itself). Runs online updates when
/// the config enables them.
std::vector<BoundingBox> track_sequence(const TrackerModel& model, const Sequence& seq,
                                        const TrackConfig& cfg, Rng& rng,
                                        TrackerModel* final_model = nullptr);

}  // namespace advtrack
