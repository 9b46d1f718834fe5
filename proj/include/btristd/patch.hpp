#pragma once

// Sliding-window construction of the Nw x Nw x Nt x Np patch tensor from an
// image sequence, and the inverse mapping back to frames.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "btristd/error.hpp"
#include "btristd/tensor.hpp"

namespace btristd {

/// Grayscale frame, row-major. Loaded images hold normalized intensities in [0,1].
struct Frame {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  Frame() = default;
  Frame(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), pixels(h * w, fill) {}
  Frame(std::size_t h, std::size_t w, std::vector<double> px) : height(h), width(w), pixels(std::move(px)) {
    if (pixels.size() != h * w) fail(ErrorKind::Input, "pixel count does not match frame size");
  }

  double& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct PatchConfig {
  std::size_t patch_size = 60;     // Nw
  std::size_t stride = 60;         // 1 <= stride <= Nw
  std::size_t temporal_size = 15;  // Nt

  void validate(std::size_t height, std::size_t width, std::size_t frames) const {
    if (patch_size == 0 || temporal_size == 0) fail(ErrorKind::Parameter, "patch size and temporal size must be positive");
    if (stride == 0 || stride > patch_size) fail(ErrorKind::Parameter, "stride must lie in [1, patch size]");
    if (patch_size > std::min(height, width))
      fail(ErrorKind::Parameter, "patch size " + std::to_string(patch_size) + " exceeds frame size");
    if (temporal_size > frames)
      fail(ErrorKind::Range, "temporal size " + std::to_string(temporal_size) + " exceeds sequence length " +
                                 std::to_string(frames));
  }
};

/// Window origins along one axis: multiples of the stride, plus a final origin
/// clamped to the border so the last pixel is always covered.
inline std::vector<std::size_t> window_positions(std::size_t extent, std::size_t patch, std::size_t stride) {
  std::vector<std::size_t> pos;
  for (std::size_t p = 0; p + patch <= extent; p += stride) pos.push_back(p);
  if (pos.back() + patch < extent) pos.push_back(extent - patch);
  return pos;
}

struct PatchOrigin {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const PatchOrigin&, const PatchOrigin&) = default;
};

/// Maps tensor indices back to (frame, pixel): patch p starts at origins[p];
/// temporal slice t is frame start_frame + t.
struct PatchProvenance {
  std::size_t frame_height = 0;
  std::size_t frame_width = 0;
  std::size_t patch_size = 0;
  std::size_t temporal_size = 0;
  std::size_t start_frame = 0;
  std::vector<PatchOrigin> origins;

  Shape tensor_shape() const { return {patch_size, patch_size, temporal_size, origins.size()}; }

  void validate() const {
    for (const auto& o : origins)
      if (o.row + patch_size > frame_height || o.col + patch_size > frame_width)
        fail(ErrorKind::Shape, "patch origin outside frame");
  }
};

struct PatchTensor4D {
  DenseTensor tensor;
  PatchProvenance provenance;
};

/// Patch grid for a frame; patches are ordered row-origin fastest.
inline std::vector<PatchOrigin> patch_grid(std::size_t height, std::size_t width, const PatchConfig& cfg) {
  const auto rows = window_positions(height, cfg.patch_size, cfg.stride);
  const auto cols = window_positions(width, cfg.patch_size, cfg.stride);
  std::vector<PatchOrigin> grid;
  grid.reserve(rows.size() * cols.size());
  for (std::size_t c : cols)
    for (std::size_t r : rows) grid.push_back({r, c});
  return grid;
}

inline PatchTensor4D build_tensor(std::span<const Frame> frames, const PatchConfig& cfg, std::size_t window_start) {
  if (frames.empty()) fail(ErrorKind::Input, "empty frame sequence");
  const std::size_t h = frames.front().height, w = frames.front().width;
  for (const auto& f : frames)
    if (f.height != h || f.width != w) fail(ErrorKind::Input, "frames differ in size");
  cfg.validate(h, w, frames.size());
  if (window_start + cfg.temporal_size > frames.size())
    fail(ErrorKind::Range, "window starting at frame " + std::to_string(window_start) + " runs past the sequence");

  PatchProvenance prov{h, w, cfg.patch_size, cfg.temporal_size, window_start, patch_grid(h, w, cfg)};
  DenseTensor t(prov.tensor_shape());
  const std::size_t nw = cfg.patch_size;
  auto out = t.data();
  std::size_t lin = 0;
  for (std::size_t p = 0; p < prov.origins.size(); ++p) {
    const auto [r0, c0] = prov.origins[p];
    for (std::size_t s = 0; s < cfg.temporal_size; ++s) {
      const Frame& f = frames[window_start + s];
      for (std::size_t j = 0; j < nw; ++j)
        for (std::size_t i = 0; i < nw; ++i) out[lin++] = f.at(r0 + i, c0 + j);
    }
  }
  return {std::move(t), std::move(prov)};
}

enum class Overlap { Mean, Median };

/// Folds a patch tensor back into Nt frames. Pixels covered by several patches
/// take the mean (or median) of their copies, visited in patch order.
inline std::vector<Frame> reconstruct(const PatchTensor4D& pt, Overlap mode = Overlap::Mean) {
  const auto& prov = pt.provenance;
  prov.validate();
  if (pt.tensor.shape() != prov.tensor_shape())
    fail(ErrorKind::Shape, "tensor shape " + shape_string(pt.tensor.shape()) + " inconsistent with provenance");

  const std::size_t h = prov.frame_height, w = prov.frame_width, nw = prov.patch_size;
  const auto data = pt.tensor.data();
  std::vector<Frame> frames;
  frames.reserve(prov.temporal_size);

  if (mode == Overlap::Mean) {
    // Running mean, so identical copies reproduce their value exactly.
    std::vector<unsigned> seen(h * w);
    for (std::size_t s = 0; s < prov.temporal_size; ++s) {
      Frame f(h, w);
      std::fill(seen.begin(), seen.end(), 0u);
      for (std::size_t p = 0; p < prov.origins.size(); ++p) {
        const auto [r0, c0] = prov.origins[p];
        const std::size_t base = nw * nw * (s + prov.temporal_size * p);
        for (std::size_t j = 0; j < nw; ++j)
          for (std::size_t i = 0; i < nw; ++i) {
            const std::size_t k = (r0 + i) * w + c0 + j;
            f.pixels[k] += (data[base + i + nw * j] - f.pixels[k]) / ++seen[k];
          }
      }
      frames.push_back(std::move(f));
    }
    return frames;
  }

  for (std::size_t s = 0; s < prov.temporal_size; ++s) {
    std::vector<std::vector<double>> copies(h * w);
    for (std::size_t p = 0; p < prov.origins.size(); ++p) {
      const auto [r0, c0] = prov.origins[p];
      const std::size_t base = nw * nw * (s + prov.temporal_size * p);
      for (std::size_t j = 0; j < nw; ++j)
        for (std::size_t i = 0; i < nw; ++i) copies[(r0 + i) * w + c0 + j].push_back(data[base + i + nw * j]);
    }
    Frame f(h, w);
    for (std::size_t k = 0; k < copies.size(); ++k) {
      auto& v = copies[k];
      if (v.empty()) continue;
      std::sort(v.begin(), v.end());
      const std::size_t n = v.size();
      f.pixels[k] = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

/// Starting frames of the temporal windows covering a sequence: consecutive
/// blocks of Nt frames, the last one right-aligned to the end.
inline std::vector<std::size_t> window_starts(std::size_t sequence_length, std::size_t temporal_size) {
  if (temporal_size == 0) fail(ErrorKind::Parameter, "temporal size must be positive");
  if (temporal_size > sequence_length)
    fail(ErrorKind::Range, "temporal size " + std::to_string(temporal_size) + " exceeds sequence length " +
                               std::to_string(sequence_length));
  std::vector<std::size_t> starts;
  const std::size_t n = (sequence_length + temporal_size - 1) / temporal_size;
  for (std::size_t k = 0; k + 1 < n; ++k) starts.push_back(k * temporal_size);
  starts.push_back(sequence_length - temporal_size);
  return starts;
}

}  // namespace btristd
