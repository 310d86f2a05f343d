#pragma once

#include <string>
#include <vector>

#include "advtrack/frame.hpp"
#include "advtrack/geometry.hpp"

namespace advtrack {

/// A video with one annotated target box per frame. |frames| == |groundtruth| >= 2.
struct Sequence {
  std::vector<Frame> frames;
  std::vector<BoundingBox> groundtruth;
  std::string name;

  int length() const { return static_cast<int>(frames.size()); }
};

/// Throws std::invalid_argument if the sequence violates its invariants
/// (length >= 2, matching counts, valid frames, boxes intersecting the frame).
void validate_sequence(const Sequence& seq);

}  // namespace advtrack
