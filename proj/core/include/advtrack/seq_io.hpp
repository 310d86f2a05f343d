#pragma once

#include <filesystem>

#include "advtrack/sequence.hpp"

namespace advtrack {

/// On-disk layout of a sequence directory:
///   %08d.pgm / %08d.ppm   8-bit binary frames, numbered from 1
///   groundtruth.txt       line t: "x,y,w,h" (reals, comma-separated)
///   meta.json + %08d.f64  optional lossless sidecar: width/height/channels/T
///                         header and flat little-endian doubles, row-major,
///                         channel-outermost
struct SaveOptions {
  bool lossless = false;  // also write the .f64 sidecar and meta.json
};

void save_sequence(const Sequence& seq, const std::filesystem::path& dir,
                   const SaveOptions& opts = {});

/// Reads a sequence directory. When the lossless sidecar is present it wins;
/// otherwise 8-bit frames are read. Errors carry file (and line) context.
Sequence load_sequence(const std::filesystem::path& dir);

}  // namespace advtrack
