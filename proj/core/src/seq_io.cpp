#include "advtrack/seq_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "advtrack/text.hpp"

namespace fs = std::filesystem;

namespace advtrack {

namespace {

std::string frame_stem(int index1) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08d", index1);
  return buf;
}

std::uint8_t quantize(double v) {
  const double c = clamp255(v);
  return static_cast<std::uint8_t>(std::llround(c));
}

void write_binary(const fs::path& p, const void* data, std::size_t n) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + p.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

void write_pnm(const Frame& f, const fs::path& p) {
  std::ostringstream head;
  head << (f.channels == 1 ? "P5" : "P6") << "\n"
       << f.width << " " << f.height << "\n255\n";
  std::string bytes = head.str();
  bytes.reserve(bytes.size() + f.size());
  if (f.channels == 1) {
    for (int r = 0; r < f.height; ++r)
      for (int c = 0; c < f.width; ++c)
        bytes.push_back(static_cast<char>(quantize(f.at(0, r, c))));
  } else {
    for (int r = 0; r < f.height; ++r)
      for (int c = 0; c < f.width; ++c)
        for (int ch = 0; ch < 3; ++ch)
          bytes.push_back(static_cast<char>(quantize(f.at(ch, r, c))));
  }
  write_binary(p, bytes.data(), bytes.size());
}

void write_f64(const Frame& f, const fs::path& p) {
  static_assert(sizeof(double) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    write_binary(p, f.data.data(), f.data.size() * 8);
  } else {
    std::vector<unsigned char> buf(f.data.size() * 8);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      auto u = std::bit_cast<std::uint64_t>(f.data[i]);
      for (int b = 0; b < 8; ++b) buf[i * 8 + b] = static_cast<unsigned char>(u >> (8 * b));
    }
    write_binary(p, buf.data(), buf.size());
  }
}

std::vector<char> read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + p.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  return buf;
}

// Reads one whitespace/comment-delimited PNM header token starting at `pos`.
std::string pnm_token(const std::vector<char>& buf, std::size_t& pos, const fs::path& p) {
  while (pos < buf.size()) {
    if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
      ++pos;
    } else if (buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
  if (start == pos) throw std::runtime_error("truncated PNM header: " + p.string());
  return std::string(buf.begin() + start, buf.begin() + pos);
}

Frame read_pnm(const fs::path& p) {
  const std::vector<char> buf = read_all(p);
  std::size_t pos = 0;
  const std::string magic = pnm_token(buf, pos, p);
  int channels = 0;
  if (magic == "P5") channels = 1;
  else if (magic == "P6") channels = 3;
  else throw std::runtime_error("unsupported pixel format '" + magic + "' in " + p.string());
  const int w = std::stoi(pnm_token(buf, pos, p));
  const int h = std::stoi(pnm_token(buf, pos, p));
  const int maxval = std::stoi(pnm_token(buf, pos, p));
  if (maxval != 255)
    throw std::runtime_error("unsupported maxval " + std::to_string(maxval) +
                             " (only 8-bit supported) in " + p.string());
  ++pos;  // single whitespace after maxval
  const std::size_t need = static_cast<std::size_t>(w) * h * channels;
  if (buf.size() - pos < need)
    throw std::runtime_error("truncated pixel data in " + p.string());
  Frame f(w, h, channels);
  if (channels == 1) {
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        f.at(0, r, c) = static_cast<unsigned char>(buf[pos++]);
  } else {
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        for (int ch = 0; ch < 3; ++ch)
          f.at(ch, r, c) = static_cast<unsigned char>(buf[pos++]);
  }
  return f;
}

Frame read_f64(const fs::path& p, int w, int h, int c) {
  const std::vector<char> buf = read_all(p);
  const std::size_t need = static_cast<std::size_t>(w) * h * c * 8;
  if (buf.size() != need)
    throw std::runtime_error("sidecar " + p.string() + ": expected " +
                             std::to_string(need) + " bytes, got " +
                             std::to_string(buf.size()));
  Frame f(w, h, c);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(f.data.data(), buf.data(), need);
  } else {
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      std::uint64_t u = 0;
      for (int b = 0; b < 8; ++b)
        u |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i * 8 + b])) << (8 * b);
      f.data[i] = std::bit_cast<double>(u);
    }
  }
  return f;
}

std::vector<BoundingBox> read_groundtruth(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open: " + p.string());
  std::vector<BoundingBox> boxes;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string ctx = p.string() + " line " + std::to_string(lineno);
    std::vector<std::string> parts;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) parts.push_back(tok);
    if (parts.size() != 4)
      throw std::runtime_error(ctx + ": expected 4 comma-separated values, got " +
                               std::to_string(parts.size()));
    BoundingBox b{parse_double(parts[0], ctx), parse_double(parts[1], ctx),
                  parse_double(parts[2], ctx), parse_double(parts[3], ctx)};
    if (!b.valid()) throw std::runtime_error(ctx + ": box has non-positive size");
    boxes.push_back(b);
  }
  return boxes;
}

}  // namespace

void save_sequence(const Sequence& seq, const fs::path& dir, const SaveOptions& opts) {
  validate_sequence(seq);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("cannot create directory: " + dir.string());

  const std::string ext = seq.frames[0].channels == 1 ? ".pgm" : ".ppm";
  for (int t = 0; t < seq.length(); ++t) {
    const std::string stem = frame_stem(t + 1);
    write_pnm(seq.frames[t], dir / (stem + ext));
    if (opts.lossless) write_f64(seq.frames[t], dir / (stem + ".f64"));
  }

  std::ofstream gt(dir / "groundtruth.txt");
  if (!gt) throw std::runtime_error("cannot open for writing: " + (dir / "groundtruth.txt").string());
  for (const BoundingBox& b : seq.groundtruth)
    gt << fmt_double(b.x) << ',' << fmt_double(b.y) << ','
       << fmt_double(b.w) << ',' << fmt_double(b.h) << '\n';

  if (opts.lossless) {
    nlohmann::json meta = {{"width", seq.frames[0].width},
                           {"height", seq.frames[0].height},
                           {"channels", seq.frames[0].channels},
                           {"T", seq.length()}};
    std::ofstream m(dir / "meta.json");
    m << meta.dump() << '\n';
  }
}

Sequence load_sequence(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error("not a directory: " + dir.string());

  Sequence seq;
  seq.name = dir.filename().string();
  seq.groundtruth = read_groundtruth(dir / "groundtruth.txt");

  const fs::path meta_path = dir / "meta.json";
  if (fs::exists(meta_path)) {
    nlohmann::json meta;
    try {
      std::ifstream m(meta_path);
      m >> meta;
    } catch (const std::exception& e) {
      throw std::runtime_error(meta_path.string() + ": " + e.what());
    }
    const int w = meta.at("width").get<int>();
    const int h = meta.at("height").get<int>();
    const int c = meta.at("channels").get<int>();
    const int T = meta.at("T").get<int>();
    for (int t = 1; t <= T; ++t)
      seq.frames.push_back(read_f64(dir / (frame_stem(t) + ".f64"), w, h, c));
  } else {
    // collect numbered 8-bit frames, ordered by their number
    std::map<int, fs::path> numbered;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const fs::path& p = entry.path();
      if (p.extension() != ".pgm" && p.extension() != ".ppm") continue;
      try {
        numbered[std::stoi(p.stem().string())] = p;
      } catch (const std::exception&) {
        throw std::runtime_error("frame file without a numeric name: " + p.string());
      }
    }
    for (const auto& [num, p] : numbered) seq.frames.push_back(read_pnm(p));
  }

  if (seq.frames.size() != seq.groundtruth.size())
    throw std::runtime_error(dir.string() + ": " + std::to_string(seq.frames.size()) +
                             " frames but " + std::to_string(seq.groundtruth.size()) +
                             " groundtruth lines");
  validate_sequence(seq);
  return seq;
}

}  // namespace advtrack
