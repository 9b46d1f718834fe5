#pragma once

// File formats: binary PGM (P5) frames, the raw BTRT tensor container, the
// whitespace ground-truth list and the CSV reports.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "btristd/correlation.hpp"
#include "btristd/error.hpp"
#include "btristd/evaluation.hpp"
#include "btristd/patch.hpp"
#include "btristd/tensor.hpp"

namespace btristd {

namespace fs = std::filesystem;

// ---- PGM -------------------------------------------------------------------

namespace detail {

inline std::string pgm_token(std::istream& in, const fs::path& path) {
  std::string tok;
  for (;;) {
    const int ch = in.peek();
    if (ch == EOF) fail(ErrorKind::Format, path.string() + ": truncated PGM header");
    if (std::isspace(ch)) {
      in.get();
    } else if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
    } else {
      break;
    }
  }
  while (in.peek() != EOF && !std::isspace(in.peek())) tok.push_back(static_cast<char>(in.get()));
  return tok;
}

inline std::size_t pgm_number(std::istream& in, const fs::path& path) {
  const std::string tok = pgm_token(in, path);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }))
    fail(ErrorKind::Format, path.string() + ": malformed PGM header field '" + tok + "'");
  return std::stoul(tok);
}

}  // namespace detail

/// Reads a binary PGM; pixels are divided by maxval.
inline Frame read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Input, "cannot open " + path.string());
  if (detail::pgm_token(in, path) != "P5") fail(ErrorKind::Format, path.string() + ": not a binary PGM (P5)");
  const std::size_t w = detail::pgm_number(in, path);
  const std::size_t h = detail::pgm_number(in, path);
  const std::size_t maxval = detail::pgm_number(in, path);
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) fail(ErrorKind::Format, path.string() + ": bad PGM dimensions");
  if (!std::isspace(in.get())) fail(ErrorKind::Format, path.string() + ": missing separator after maxval");

  const std::size_t bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(w * h * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) fail(ErrorKind::Format, path.string() + ": truncated pixel data");

  Frame f(h, w);
  const double scale = static_cast<double>(maxval);
  for (std::size_t k = 0; k < w * h; ++k) {
    const unsigned v = bytes == 2 ? (unsigned{raw[2 * k]} << 8) | raw[2 * k + 1] : raw[k];
    if (v > maxval) fail(ErrorKind::Format, path.string() + ": pixel exceeds maxval");
    f.pixels[k] = v / scale;
  }
  return f;
}

/// Writes a frame with values clamped to [0, 1], quantized round-half-up to
/// 8 bits (maxval 255) or 16 bits (maxval 65535).
inline void write_pgm(const fs::path& path, const Frame& f, int bits = 8) {
  if (bits != 8 && bits != 16) fail(ErrorKind::Parameter, "PGM bit depth must be 8 or 16");
  const unsigned maxval = bits == 8 ? 255u : 65535u;
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot write " + path.string());
  out << "P5\n" << f.width << " " << f.height << "\n" << maxval << "\n";
  std::vector<unsigned char> raw;
  raw.reserve(f.pixels.size() * (bits / 8));
  for (double v : f.pixels) {
    const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    const auto q = static_cast<unsigned>(std::floor(c * maxval + 0.5));
    if (bits == 16) raw.push_back(static_cast<unsigned char>(q >> 8));
    raw.push_back(static_cast<unsigned char>(q & 0xff));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) fail(ErrorKind::Input, "failed writing " + path.string());
}

/// All *.pgm files of a directory in lexicographic order.
inline std::vector<Frame> load_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::Input, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorKind::Input, "no .pgm files in " + dir.string());
  std::vector<Frame> frames;
  frames.reserve(files.size());
  for (const auto& p : files) {
    frames.push_back(read_pgm(p));
    if (frames.back().height != frames.front().height || frames.back().width != frames.front().width)
      fail(ErrorKind::Format, p.string() + ": frame size differs from " + files.front().string());
  }
  return frames;
}

inline std::string frame_name(std::size_t index) {
  std::ostringstream s;
  s << std::setw(4) << std::setfill('0') << index << ".pgm";
  return s.str();
}

inline void save_frames(const std::vector<Frame>& frames, const fs::path& dir, int bits = 8) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < frames.size(); ++k) write_pgm(dir / frame_name(k), frames[k], bits);
}

// ---- Tensor files ------------------------------------------------------------
// "BTRT", u32 order, order x u64 extents, then f64 values in storage order, all
// little-endian.

namespace detail {

template <typename T>
void put_le(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const fs::path& path) {
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) fail(ErrorKind::Format, path.string() + ": truncated tensor file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

inline void write_tensor(const fs::path& path, const DenseTensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Input, "cannot write " + path.string());
  out.write("BTRT", 4);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.order()));
  for (std::size_t e : t.shape()) detail::put_le<std::uint64_t>(out, e);
  for (double v : t.data()) detail::put_le<double>(out, v);
  if (!out) fail(ErrorKind::Input, "failed writing " + path.string());
}

inline DenseTensor read_tensor(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Input, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "BTRT", 4) != 0) fail(ErrorKind::Format, path.string() + ": bad magic");
  const auto order = detail::get_le<std::uint32_t>(in, path);
  if (order == 0 || order > 64) fail(ErrorKind::Format, path.string() + ": implausible tensor order");
  Shape shape(order);
  for (auto& e : shape) {
    const auto v = detail::get_le<std::uint64_t>(in, path);
    if (v == 0) fail(ErrorKind::Format, path.string() + ": zero extent");
    e = static_cast<std::size_t>(v);
  }
  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
  in.seekg(here);
  std::uint64_t count = 1;
  for (auto e : shape) {
    if (count > remaining / 8 / e) fail(ErrorKind::Format, path.string() + ": truncated tensor file");
    count *= e;
  }
  if (count * 8 != remaining) fail(ErrorKind::Format, path.string() + ": payload size does not match extents");
  std::vector<double> data(count);
  for (auto& v : data) v = detail::get_le<double>(in, path);
  return DenseTensor(std::move(shape), std::move(data));
}

// ---- Ground truth ------------------------------------------------------------
// One target per line: frame row col [box_h box_w], 0-based; '#' starts a comment.

inline GroundTruth parse_ground_truth(std::istream& in, const std::string& name = "ground truth") {
  GroundTruth gt;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> fields;
    for (std::string tok; ls >> tok;) fields.push_back(tok);
    if (fields.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    if (fields.size() != 3 && fields.size() != 5) fail(ErrorKind::Format, where + ": expected 3 or 5 fields");
    std::vector<double> v;
    for (const auto& f : fields) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != f.size() || !std::isfinite(x)) fail(ErrorKind::Format, where + ": bad number '" + f + "'");
      v.push_back(x);
    }
    if (v[0] < 0 || v[0] != std::floor(v[0])) fail(ErrorKind::Format, where + ": frame index must be a nonnegative integer");
    if (v[1] < 0 || v[2] < 0) fail(ErrorKind::Format, where + ": negative coordinate");
    Target t{v[1], v[2], std::nullopt, std::nullopt};
    if (v.size() == 5) {
      if (!(v[3] > 0) || !(v[4] > 0)) fail(ErrorKind::Format, where + ": box must be nonempty");
      t.box_h = v[3];
      t.box_w = v[4];
    }
    const auto frame = static_cast<std::size_t>(v[0]);
    if (gt.targets.size() <= frame) gt.targets.resize(frame + 1);
    gt.targets[frame].push_back(t);
  }
  return gt;
}

inline GroundTruth read_ground_truth(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open " + path.string());
  return parse_ground_truth(in, path.string());
}

inline void write_ground_truth(const fs::path& path, const GroundTruth& gt) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Input, "cannot write " + path.string());
  out << "# frame row col [box_h box_w]\n" << std::setprecision(17);
  for (std::size_t f = 0; f < gt.targets.size(); ++f)
    for (const auto& t : gt.targets[f]) {
      out << f << " " << t.row << " " << t.col;
      if (t.box_h && t.box_w) out << " " << *t.box_h << " " << *t.box_w;
      out << "\n";
    }
}

// ---- CSV reports -------------------------------------------------------------

inline void write_metrics_csv(const fs::path& path, const RocCurve& c) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Input, "cannot write " + path.string());
  out << std::setprecision(10);
  out << "threshold,pd,pf\n";
  for (std::size_t k = 0; k < c.thresholds.size(); ++k) out << c.thresholds[k] << "," << c.pd[k] << "," << c.pf[k] << "\n";
  out << "auc_df,auc_dtau,auc_ftau,auc_snpr,auc_tdbs,auc_odp,snpr_capped\n";
  out << c.auc_df << "," << c.auc_dtau << "," << c.auc_ftau << "," << c.family.snpr << "," << c.family.tdbs << ","
      << c.family.odp << "," << (c.family.snpr_capped ? 1 : 0) << "\n";
}

inline void write_corr_csv(const fs::path& path, const CorrelationReport& r) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Input, "cannot write " + path.string());
  out << std::setprecision(10) << "pair,slice_index,energy_ratio,direction_cos\n";
  for (const auto& p : r.pairs) {
    const std::string label = std::to_string(p.pair.i + 1) + "-" + std::to_string(p.pair.j + 1);
    for (std::size_t k = 0; k < p.energy_ratios.size(); ++k) {
      out << label << "," << k << "," << p.energy_ratios[k] << ",";
      if (k < p.direction_cos.size()) out << p.direction_cos[k];
      out << "\n";
    }
  }
}

struct TimingRow {
  std::size_t window = 0;
  std::size_t start_frame = 0;
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;
};

inline void write_timing_csv(const fs::path& path, const std::vector<TimingRow>& rows) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Input, "cannot write " + path.string());
  out << "window,start_frame,iterations,converged,solve_seconds\n" << std::setprecision(6);
  double total = 0.0;
  for (const auto& r : rows) {
    out << r.window << "," << r.start_frame << "," << r.iterations << "," << (r.converged ? 1 : 0) << "," << r.seconds
        << "\n";
    total += r.seconds;
  }
  out << "total,,,," << total << "\n";
}

}  // namespace btristd
