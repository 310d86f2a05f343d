#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "advtrack/frame.hpp"
#include "advtrack/proposals.hpp"

namespace advtrack {

/// Two-branch proposal scorer: bilinear crop (P x P x C) -> linear feature
/// layer -> ReLU -> classification head (2 logits: target, background) and,
/// when enabled, a regression head (4 anchor offsets). Crops are normalized
/// to [-1, 1] before the feature layer.
struct TrackerModel {
  int P = 16;
  int H = 64;
  int channels = 1;
  double lambda = 1.0;
  bool reg_enabled = true;

  std::vector<double> w1, b1;  // feature layer, D -> H, row-major w1[h*D + i]
  std::vector<double> w2, b2;  // classification head, H -> 2
  std::vector<double> w3, b3;  // regression head, H -> 4; empty when disabled

  int input_dim() const { return P * P * channels; }

  /// Xavier-uniform weights, zero biases, seeded.
  static TrackerModel init(int P, int H, int channels, double lambda,
                           bool reg_enabled, std::uint64_t seed);

  bool operator==(const TrackerModel&) const = default;
};

constexpr double kPixelScale = 127.5;  // crop normalization: (v - 127.5) / 127.5

struct ProposalOutput {
  std::array<double, 2> logits{};  // (target, background)
  std::array<double, 4> reg{};     // anchor offsets; zeros when head disabled
};

std::vector<ProposalOutput> forward(const TrackerModel& model,
                                    std::span<const Proposal> proposals);

/// Softmax cross-entropy of one logit pair against a one-hot label.
double softmax_ce(const std::array<double, 2>& logits, ClsLabel label);

/// Elementwise smooth-L1 (0.5 d^2 for |d| < 1, |d| - 0.5 otherwise), summed.
double smooth_l1(const std::array<double, 4>& pred, const std::array<double, 4>& target);

struct LossBreakdown {
  double total = 0.0;
  double cls = 0.0;
  double reg = 0.0;
  std::vector<double> per_proposal_cls;  // zero for ignored proposals
  std::vector<double> per_proposal_reg;  // zero for non-positive proposals
};

/// Composite tracking loss: sum over proposals of L_c + lambda * L_r.
/// Classification skips ignored proposals; regression covers positives only
/// and is dropped entirely when the regression branch is disabled.
/// Throws LabelingError when every proposal is ignored.
LossBreakdown total_loss(const TrackerModel& model, const LabeledProposals& lp);

enum class BranchMask { Both, ClsOnly, RegOnly };

/// Which scalar loss a gradient is taken of. `Original` is the plain
/// tracking loss; `Adversarial` is the signed difference between losses under
/// correct and pseudo labels (swapped class pair, offset/rescaled box).
struct LossSpec {
  enum class Kind { Original, Adversarial };
  Kind kind = Kind::Original;
  BoundingBox pseudo_reg{};             // p*_r; adversarial only
  BranchMask mask = BranchMask::Both;   // adversarial only

  static LossSpec original() { return {}; }
  static LossSpec adversarial(const BoundingBox& pseudo_reg, BranchMask mask) {
    return {Kind::Adversarial, pseudo_reg, mask};
  }
};

/// Scalar value of the specified loss (used for finite-difference audits and
/// attack bookkeeping).
double loss_value(const TrackerModel& model, const LabeledProposals& lp,
                  const LossSpec& spec);

/// Exact reverse-mode derivative of the specified loss with respect to every
/// pixel of `frame`, accumulated over all proposals through the
/// bilinear-sampling adjoint. Model parameters are treated as constants.
GradientField input_gradient(const TrackerModel& model, const Frame& frame,
                             const LabeledProposals& lp, const LossSpec& spec);

struct ParamGrads {
  std::vector<double> w1, b1, w2, b2, w3, b3;
};

/// d(total_loss)/d(theta).
ParamGrads param_gradient(const TrackerModel& model, const LabeledProposals& lp);

/// theta -= lr * scale * grad.
void sgd_step(TrackerModel& model, const ParamGrads& g, double lr, double scale = 1.0);

/// JSON checkpoint (schema_version, hyperparameters, flat weight arrays with
/// shortest-roundtrip reals).
void save_model(const TrackerModel& model, const std::filesystem::path& path);
TrackerModel load_model(const std::filesystem::path& path);

}  // namespace advtrack
