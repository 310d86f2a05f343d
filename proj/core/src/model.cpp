#include "advtrack/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "advtrack/geometry.hpp"
#include "advtrack/rng.hpp"

namespace advtrack {

namespace {

void fill_xavier(std::vector<double>& w, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : w) v = rng.uniform(-limit, limit);
}

inline double sl1_prime(double d) {
  if (d > 1.0) return 1.0;
  if (d < -1.0) return -1.0;
  return d;
}

struct Activations {
  std::vector<double> x;  // normalized crop, D
  std::vector<double> z;  // pre-activation, H
  std::vector<double> h;  // post-ReLU, H
  ProposalOutput out;
};

void run_forward(const TrackerModel& m, const Proposal& p, Activations& a) {
  const int D = m.input_dim();
  a.x.resize(D);
  for (int i = 0; i < D; ++i) a.x[i] = (p.crop[i] - kPixelScale) / kPixelScale;
  a.z.assign(m.H, 0.0);
  for (int k = 0; k < m.H; ++k) {
    const double* row = m.w1.data() + static_cast<std::size_t>(k) * D;
    double acc = m.b1[k];
    for (int i = 0; i < D; ++i) acc += row[i] * a.x[i];
    a.z[k] = acc;
  }
  a.h.resize(m.H);
  for (int k = 0; k < m.H; ++k) a.h[k] = a.z[k] > 0.0 ? a.z[k] : 0.0;
  for (int j = 0; j < 2; ++j) {
    const double* row = m.w2.data() + static_cast<std::size_t>(j) * m.H;
    double acc = m.b2[j];
    for (int k = 0; k < m.H; ++k) acc += row[k] * a.h[k];
    a.out.logits[j] = acc;
  }
  a.out.reg = {};
  if (m.reg_enabled)
    for (int j = 0; j < 4; ++j) {
      const double* row = m.w3.data() + static_cast<std::size_t>(j) * m.H;
      double acc = m.b3[j];
      for (int k = 0; k < m.H; ++k) acc += row[k] * a.h[k];
      a.out.reg[j] = acc;
    }
}

std::array<double, 2> softmax2(const std::array<double, 2>& z) {
  const double m = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m);
  const double s = e0 + e1;
  return {e0 / s, e1 / s};
}

// Per-proposal adjoints of the requested scalar loss w.r.t. the head outputs.
struct HeadGrads {
  std::array<double, 2> dlogits{};
  std::array<double, 4> dreg{};
  bool any = false;
};

HeadGrads head_grads(const TrackerModel& m, const LabeledProposals& lp, std::size_t n,
                     const ProposalOutput& out, const LossSpec& spec) {
  HeadGrads g;
  const ClsLabel label = lp.labels[n];
  const bool positive = label == ClsLabel::Target;
  if (spec.kind == LossSpec::Kind::Original) {
    if (label != ClsLabel::Ignore) {
      const auto sm = softmax2(out.logits);
      const auto t = one_hot(label);
      g.dlogits = {sm[0] - t[0], sm[1] - t[1]};
      g.any = true;
    }
    if (positive && m.reg_enabled) {
      const auto target = encode_reg(lp.reg_target, lp.proposals[n].box);
      for (int j = 0; j < 4; ++j) g.dreg[j] = m.lambda * sl1_prime(out.reg[j] - target[j]);
      g.any = true;
    }
  } else {
    if (spec.mask != BranchMask::RegOnly && label != ClsLabel::Ignore) {
      // d[L_c(p) - L_c(p*)]/dlogits: the softmax terms cancel, leaving p* - p.
      const auto t = one_hot(label);
      g.dlogits = {(1.0 - t[0]) - t[0], (1.0 - t[1]) - t[1]};
      g.any = true;
    }
    if (spec.mask != BranchMask::ClsOnly && positive && m.reg_enabled) {
      const auto target = encode_reg(lp.reg_target, lp.proposals[n].box);
      const auto pseudo = encode_reg(spec.pseudo_reg, lp.proposals[n].box);
      for (int j = 0; j < 4; ++j)
        g.dreg[j] = m.lambda * (sl1_prime(out.reg[j] - target[j]) -
                                sl1_prime(out.reg[j] - pseudo[j]));
      g.any = true;
    }
  }
  return g;
}

void check_spec(const TrackerModel& m, const LossSpec& spec) {
  if (spec.kind == LossSpec::Kind::Adversarial) {
    if (spec.mask == BranchMask::RegOnly && !m.reg_enabled)
      throw std::invalid_argument(
          "regression-only adversarial loss requires the regression branch");
    if (spec.mask != BranchMask::ClsOnly && m.reg_enabled && !spec.pseudo_reg.valid())
      throw std::invalid_argument("adversarial loss needs a valid pseudo regression box");
  }
}

}  // namespace

TrackerModel TrackerModel::init(int P, int H, int channels, double lambda,
                                bool reg_enabled, std::uint64_t seed) {
  if (P < 2 || H < 1 || (channels != 1 && channels != 3))
    throw std::invalid_argument("TrackerModel::init: bad hyperparameters");
  TrackerModel m;
  m.P = P;
  m.H = H;
  m.channels = channels;
  m.lambda = lambda;
  m.reg_enabled = reg_enabled;
  const int D = m.input_dim();
  Rng rng(seed);
  m.w1.resize(static_cast<std::size_t>(H) * D);
  m.b1.assign(H, 0.0);
  fill_xavier(m.w1, D, H, rng);
  m.w2.resize(2 * static_cast<std::size_t>(H));
  m.b2.assign(2, 0.0);
  fill_xavier(m.w2, H, 2, rng);
  if (reg_enabled) {
    m.w3.resize(4 * static_cast<std::size_t>(H));
    m.b3.assign(4, 0.0);
    fill_xavier(m.w3, H, 4, rng);
  }
  return m;
}

std::vector<ProposalOutput> forward(const TrackerModel& model,
                                    std::span<const Proposal> proposals) {
  std::vector<ProposalOutput> out;
  out.reserve(proposals.size());
  Activations a;
  for (const Proposal& p : proposals) {
    if (static_cast<int>(p.crop.size()) != model.input_dim())
      throw std::invalid_argument("forward: crop size does not match model input");
    run_forward(model, p, a);
    out.push_back(a.out);
  }
  return out;
}

double softmax_ce(const std::array<double, 2>& logits, ClsLabel label) {
  if (label == ClsLabel::Ignore)
    throw std::invalid_argument("softmax_ce: ignored label has no loss");
  const double m = std::max(logits[0], logits[1]);
  const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
  return lse - (label == ClsLabel::Target ? logits[0] : logits[1]);
}

double smooth_l1(const std::array<double, 4>& pred, const std::array<double, 4>& target) {
  double s = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double d = std::abs(pred[j] - target[j]);
    s += d < 1.0 ? 0.5 * d * d : d - 0.5;
  }
  return s;
}

LossBreakdown total_loss(const TrackerModel& model, const LabeledProposals& lp) {
  const auto outputs = forward(model, lp.proposals);
  LossBreakdown out;
  out.per_proposal_cls.assign(lp.proposals.size(), 0.0);
  out.per_proposal_reg.assign(lp.proposals.size(), 0.0);
  bool any = false;
  for (std::size_t n = 0; n < lp.proposals.size(); ++n) {
    const ClsLabel label = lp.labels[n];
    if (label == ClsLabel::Ignore) continue;
    any = true;
    out.per_proposal_cls[n] = softmax_ce(outputs[n].logits, label);
    out.cls += out.per_proposal_cls[n];
    if (label == ClsLabel::Target && model.reg_enabled) {
      const auto target = encode_reg(lp.reg_target, lp.proposals[n].box);
      out.per_proposal_reg[n] = smooth_l1(outputs[n].reg, target);
      out.reg += out.per_proposal_reg[n];
    }
  }
  if (!any) throw LabelingError("total_loss: no usable proposal");
  out.total = out.cls + model.lambda * out.reg;
  return out;
}

double loss_value(const TrackerModel& model, const LabeledProposals& lp,
                  const LossSpec& spec) {
  check_spec(model, spec);
  if (spec.kind == LossSpec::Kind::Original) return total_loss(model, lp).total;

  const auto outputs = forward(model, lp.proposals);
  double cls_diff = 0.0, reg_diff = 0.0;
  for (std::size_t n = 0; n < lp.proposals.size(); ++n) {
    const ClsLabel label = lp.labels[n];
    if (label == ClsLabel::Ignore) continue;
    if (spec.mask != BranchMask::RegOnly) {
      const ClsLabel swapped =
          label == ClsLabel::Target ? ClsLabel::Background : ClsLabel::Target;
      cls_diff += softmax_ce(outputs[n].logits, label) - softmax_ce(outputs[n].logits, swapped);
    }
    if (spec.mask != BranchMask::ClsOnly && label == ClsLabel::Target && model.reg_enabled) {
      const auto target = encode_reg(lp.reg_target, lp.proposals[n].box);
      const auto pseudo = encode_reg(spec.pseudo_reg, lp.proposals[n].box);
      reg_diff += smooth_l1(outputs[n].reg, target) - smooth_l1(outputs[n].reg, pseudo);
    }
  }
  return cls_diff + model.lambda * reg_diff;
}

GradientField input_gradient(const TrackerModel& model, const Frame& frame,
                             const LabeledProposals& lp, const LossSpec& spec) {
  check_spec(model, spec);
  GradientField grad(frame.width, frame.height, frame.channels, 0.0);
  const int D = model.input_dim();
  Activations a;
  std::vector<double> dh(model.H), crop_grad(D);
  for (std::size_t n = 0; n < lp.proposals.size(); ++n) {
    run_forward(model, lp.proposals[n], a);
    const HeadGrads hg = head_grads(model, lp, n, a.out, spec);
    if (!hg.any) continue;

    std::fill(dh.begin(), dh.end(), 0.0);
    for (int j = 0; j < 2; ++j) {
      if (hg.dlogits[j] == 0.0) continue;
      const double* row = model.w2.data() + static_cast<std::size_t>(j) * model.H;
      for (int k = 0; k < model.H; ++k) dh[k] += row[k] * hg.dlogits[j];
    }
    if (model.reg_enabled)
      for (int j = 0; j < 4; ++j) {
        if (hg.dreg[j] == 0.0) continue;
        const double* row = model.w3.data() + static_cast<std::size_t>(j) * model.H;
        for (int k = 0; k < model.H; ++k) dh[k] += row[k] * hg.dreg[j];
      }

    std::fill(crop_grad.begin(), crop_grad.end(), 0.0);
    for (int k = 0; k < model.H; ++k) {
      if (a.z[k] <= 0.0 || dh[k] == 0.0) continue;
      const double* row = model.w1.data() + static_cast<std::size_t>(k) * D;
      const double dz = dh[k];
      for (int i = 0; i < D; ++i) crop_grad[i] += row[i] * dz;
    }
    for (int i = 0; i < D; ++i) crop_grad[i] /= kPixelScale;

    crop_resize_adjoint(frame, lp.proposals[n].box, model.P, crop_grad, grad);
  }
  return grad;
}

ParamGrads param_gradient(const TrackerModel& model, const LabeledProposals& lp) {
  ParamGrads g;
  const int D = model.input_dim();
  g.w1.assign(model.w1.size(), 0.0);
  g.b1.assign(model.b1.size(), 0.0);
  g.w2.assign(model.w2.size(), 0.0);
  g.b2.assign(model.b2.size(), 0.0);
  g.w3.assign(model.w3.size(), 0.0);
  g.b3.assign(model.b3.size(), 0.0);

  const LossSpec spec = LossSpec::original();
  Activations a;
  std::vector<double> dh(model.H);
  for (std::size_t n = 0; n < lp.proposals.size(); ++n) {
    run_forward(model, lp.proposals[n], a);
    const HeadGrads hg = head_grads(model, lp, n, a.out, spec);
    if (!hg.any) continue;

    std::fill(dh.begin(), dh.end(), 0.0);
    for (int j = 0; j < 2; ++j) {
      if (hg.dlogits[j] == 0.0) continue;
      double* wrow = g.w2.data() + static_cast<std::size_t>(j) * model.H;
      const double* row = model.w2.data() + static_cast<std::size_t>(j) * model.H;
      for (int k = 0; k < model.H; ++k) {
        wrow[k] += hg.dlogits[j] * a.h[k];
        dh[k] += row[k] * hg.dlogits[j];
      }
      g.b2[j] += hg.dlogits[j];
    }
    if (model.reg_enabled)
      for (int j = 0; j < 4; ++j) {
        if (hg.dreg[j] == 0.0) continue;
        double* wrow = g.w3.data() + static_cast<std::size_t>(j) * model.H;
        const double* row = model.w3.data() + static_cast<std::size_t>(j) * model.H;
        for (int k = 0; k < model.H; ++k) {
          wrow[k] += hg.dreg[j] * a.h[k];
          dh[k] += row[k] * hg.dreg[j];
        }
        g.b3[j] += hg.dreg[j];
      }

    for (int k = 0; k < model.H; ++k) {
      if (a.z[k] <= 0.0 || dh[k] == 0.0) continue;
      const double dz = dh[k];
      double* wrow = g.w1.data() + static_cast<std::size_t>(k) * D;
      for (int i = 0; i < D; ++i) wrow[i] += dz * a.x[i];
      g.b1[k] += dz;
    }
  }
  return g;
}

void sgd_step(TrackerModel& model, const ParamGrads& g, double lr, double scale) {
  const double step = lr * scale;
  auto apply = [step](std::vector<double>& w, const std::vector<double>& gw) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * gw[i];
  };
  apply(model.w1, g.w1);
  apply(model.b1, g.b1);
  apply(model.w2, g.w2);
  apply(model.b2, g.b2);
  if (model.reg_enabled) {
    apply(model.w3, g.w3);
    apply(model.b3, g.b3);
  }
}

void save_model(const TrackerModel& m, const std::filesystem::path& path) {
  nlohmann::json j = {{"schema_version", 1},
                      {"P", m.P},
                      {"H", m.H},
                      {"channels", m.channels},
                      {"lambda", m.lambda},
                      {"reg_enabled", m.reg_enabled},
                      {"weights",
                       {{"feature_w", m.w1},
                        {"feature_b", m.b1},
                        {"cls_w", m.w2},
                        {"cls_b", m.b2},
                        {"reg_w", m.w3},
                        {"reg_b", m.b3}}}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

TrackerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (j.value("schema_version", 0) != 1)
    throw std::runtime_error(path.string() + ": unsupported checkpoint schema");
  TrackerModel m;
  m.P = j.at("P").get<int>();
  m.H = j.at("H").get<int>();
  m.channels = j.at("channels").get<int>();
  m.lambda = j.at("lambda").get<double>();
  m.reg_enabled = j.at("reg_enabled").get<bool>();
  const auto& w = j.at("weights");
  m.w1 = w.at("feature_w").get<std::vector<double>>();
  m.b1 = w.at("feature_b").get<std::vector<double>>();
  m.w2 = w.at("cls_w").get<std::vector<double>>();
  m.b2 = w.at("cls_b").get<std::vector<double>>();
  m.w3 = w.at("reg_w").get<std::vector<double>>();
  m.b3 = w.at("reg_b").get<std::vector<double>>();
  const std::size_t D = static_cast<std::size_t>(m.input_dim());
  if (m.w1.size() != D * m.H || m.b1.size() != static_cast<std::size_t>(m.H) ||
      m.w2.size() != 2u * m.H || m.b2.size() != 2u ||
      (m.reg_enabled && (m.w3.size() != 4u * m.H || m.b3.size() != 4u)))
    throw std::runtime_error(path.string() + ": weight shapes do not match hyperparameters");
  return m;
}

}  // namespace advtrack
