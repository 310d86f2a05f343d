#include "advtrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advtrack/rng.hpp"

namespace advtrack {

void validate_sequence(const Sequence& seq) {
  if (seq.frames.size() < 2)
    throw std::invalid_argument("sequence: needs at least 2 frames, got " +
                                std::to_string(seq.frames.size()));
  if (seq.frames.size() != seq.groundtruth.size())
    throw std::invalid_argument("sequence: " + std::to_string(seq.frames.size()) +
                                " frames vs " + std::to_string(seq.groundtruth.size()) +
                                " groundtruth boxes");
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    validate_frame(seq.frames[i], "frame " + std::to_string(i + 1));
    if (!seq.frames[i].same_shape(seq.frames[0]))
      throw std::invalid_argument("frame " + std::to_string(i + 1) + ": shape mismatch");
    const BoundingBox& b = seq.groundtruth[i];
    if (!b.valid())
      throw std::invalid_argument("groundtruth " + std::to_string(i + 1) + ": degenerate box");
    if (iou(b, seq.frames[i].rect()) <= 0.0)
      throw std::invalid_argument("groundtruth " + std::to_string(i + 1) +
                                  ": box does not intersect the frame");
  }
}

void validate_sim_config(const SimConfig& cfg) {
  if (cfg.frames < 2) throw std::invalid_argument("sim: frames must be >= 2");
  if (cfg.width < 32 || cfg.height < 32)
    throw std::invalid_argument("sim: frame size must be at least 32x32");
  if (cfg.channels != 1 && cfg.channels != 3)
    throw std::invalid_argument("sim: channels must be 1 or 3");
  if (!(cfg.target_min >= 4.0 && cfg.target_max >= cfg.target_min))
    throw std::invalid_argument("sim: bad target size range");
  if (cfg.motion < 0.0) throw std::invalid_argument("sim: motion must be >= 0");
  if (!(cfg.drift_min >= 0.9 && cfg.drift_max <= 1.1 && cfg.drift_min <= cfg.drift_max))
    throw std::invalid_argument("sim: scale drift range must lie in [0.9, 1.1]");
  if (cfg.noise_sigma < 0.0) throw std::invalid_argument("sim: noise sigma must be >= 0");
  if (cfg.bg_amplitude < 0.0) throw std::invalid_argument("sim: bg amplitude must be >= 0");
  const double room = std::min(cfg.width, cfg.height);
  if (cfg.target_max + 2.0 * cfg.motion + 2.0 > room)
    throw std::invalid_argument("sim: target size plus motion would exit frame bounds");
}

namespace {

// Reflect p into [lo, hi].
double fold(double p, double lo, double hi) {
  if (hi <= lo) return lo;
  const double span = 2.0 * (hi - lo);
  double q = std::fmod(p - lo, span);
  if (q < 0.0) q += span;
  return lo + (q <= hi - lo ? q : span - q);
}

constexpr int kTexRes = 32;    // canonical target texture resolution
constexpr int kBgCell = 8;     // background value-noise cell size, pixels

struct Texture {
  std::vector<double> v;  // kTexRes * kTexRes
  double at(int r, int c) const { return v[r * kTexRes + c]; }

  // Bilinear lookup at normalized (u, v) in [0,1].
  double sample(double u, double nv) const {
    const double fx = std::clamp(u, 0.0, 1.0) * (kTexRes - 1);
    const double fy = std::clamp(nv, 0.0, 1.0) * (kTexRes - 1);
    const int x0 = std::min(static_cast<int>(fx), kTexRes - 2);
    const int y0 = std::min(static_cast<int>(fy), kTexRes - 2);
    const double ax = fx - x0, ay = fy - y0;
    return (1 - ay) * ((1 - ax) * at(y0, x0) + ax * at(y0, x0 + 1)) +
           ay * ((1 - ax) * at(y0 + 1, x0) + ax * at(y0 + 1, x0 + 1));
  }
};

// High-contrast checker/ramp mix, distinct from the smooth background.
Texture make_target_texture(Rng& rng) {
  Texture t;
  t.v.resize(kTexRes * kTexRes);
  for (int r = 0; r < kTexRes; ++r)
    for (int c = 0; c < kTexRes; ++c) {
      const double checker = ((c / 4 + r / 4) % 2 == 0) ? 205.0 : 40.0;
      const double ramp = 25.0 * ((c + r) / double(2 * (kTexRes - 1)) * 2.0 - 1.0);
      const double jitter = rng.uniform(-12.0, 12.0);
      t.v[r * kTexRes + c] = clamp255(checker + ramp + jitter);
    }
  return t;
}

// Smooth value-noise background field, one per channel, static over time.
Frame make_background(const SimConfig& cfg, Rng& rng) {
  const int gw = cfg.width / kBgCell + 2;
  const int gh = cfg.height / kBgCell + 2;
  Frame bg(cfg.width, cfg.height, cfg.channels);
  std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
  for (int c = 0; c < cfg.channels; ++c) {
    for (auto& g : grid) g = rng.uniform(-1.0, 1.0);
    for (int r = 0; r < cfg.height; ++r)
      for (int col = 0; col < cfg.width; ++col) {
        const double fx = double(col) / kBgCell;
        const double fy = double(r) / kBgCell;
        const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
        const double ax = fx - x0, ay = fy - y0;
        const double n = (1 - ay) * ((1 - ax) * grid[y0 * gw + x0] + ax * grid[y0 * gw + x0 + 1]) +
                         ay * ((1 - ax) * grid[(y0 + 1) * gw + x0] + ax * grid[(y0 + 1) * gw + x0 + 1]);
        bg.at(c, r, col) = clamp255(100.0 + cfg.bg_amplitude * n);
      }
  }
  return bg;
}

// Overlap of the unit pixel [p, p+1) with the interval [lo, hi).
double overlap1d(double p, double lo, double hi) {
  return std::max(0.0, std::min(p + 1.0, hi) - std::max(p, lo));
}

Frame render(const SimConfig& cfg, const Frame& bg, const Texture& tex,
             const BoundingBox& box, Rng& rng) {
  Frame f = bg;
  static constexpr double kChannelGain[3] = {1.0, 0.82, 0.65};
  const int c0 = std::max(0, static_cast<int>(std::floor(box.x)) - 1);
  const int c1 = std::min(cfg.width - 1, static_cast<int>(std::ceil(box.right())));
  const int r0 = std::max(0, static_cast<int>(std::floor(box.y)) - 1);
  const int r1 = std::min(cfg.height - 1, static_cast<int>(std::ceil(box.bottom())));
  for (int r = r0; r <= r1; ++r)
    for (int col = c0; col <= c1; ++col) {
      const double alpha = overlap1d(col, box.x, box.right()) *
                           overlap1d(r, box.y, box.bottom());
      if (alpha <= 0.0) continue;
      const double u = (col + 0.5 - box.x) / box.w;
      const double v = (r + 0.5 - box.y) / box.h;
      const double t = tex.sample(u, v);
      for (int c = 0; c < cfg.channels; ++c) {
        const double tc = cfg.channels == 1 ? t : clamp255(t * kChannelGain[c]);
        f.at(c, r, col) = clamp255((1.0 - alpha) * f.at(c, r, col) + alpha * tc);
      }
    }
  if (cfg.noise_sigma > 0.0)
    for (double& p : f.data) p = clamp255(p + rng.normal(0.0, cfg.noise_sigma));
  return f;
}

}  // namespace

Sequence generate_sequence(const SimConfig& cfg) {
  validate_sim_config(cfg);
  Rng rng(cfg.seed);

  const Texture tex = make_target_texture(rng);
  const Frame bg = make_background(cfg, rng);

  const double side = rng.uniform(cfg.target_min, cfg.target_max);
  double w = side, h = side;
  double cx = rng.uniform(w / 2, cfg.width - w / 2);
  double cy = rng.uniform(h / 2, cfg.height - h / 2);

  Sequence seq;
  seq.name = cfg.name;
  seq.frames.reserve(cfg.frames);
  seq.groundtruth.reserve(cfg.frames);

  for (int t = 0; t < cfg.frames; ++t) {
    if (t > 0) {
      const double s = rng.uniform(cfg.drift_min, cfg.drift_max);
      w = std::clamp(w * s, cfg.target_min, cfg.target_max);
      h = std::clamp(h * s, cfg.target_min, cfg.target_max);
      // Cap the size so the box fits without moving its center; the center
      // then moves by at most (motion, motion) per axis, reflected at walls.
      w = std::min(w, 2.0 * std::min(cx, cfg.width - cx));
      h = std::min(h, 2.0 * std::min(cy, cfg.height - cy));
      const double dx = rng.uniform(-cfg.motion, cfg.motion);
      const double dy = rng.uniform(-cfg.motion, cfg.motion);
      cx = fold(cx + dx, w / 2, cfg.width - w / 2);
      cy = fold(cy + dy, h / 2, cfg.height - h / 2);
    }
    const BoundingBox box = BoundingBox::from_center(cx, cy, w, h);
    seq.frames.push_back(render(cfg, bg, tex, box, rng));
    seq.groundtruth.push_back(box);
  }
  return seq;
}

}  // namespace advtrack
