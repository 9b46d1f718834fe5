#pragma once

// Synthetic infrared-like sequences: a background (smooth, BTR low-rank or
// constant), small Gaussian targets moving at constant velocity, additive
// Gaussian noise, values clamped to [0, 1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "btristd/btr.hpp"
#include "btristd/error.hpp"
#include "btristd/evaluation.hpp"
#include "btristd/patch.hpp"
#include "btristd/tensor.hpp"

namespace btristd {

enum class Background { Smooth, LowRankBtr, Constant };

struct SynthTarget {
  double row = 0.0;
  double col = 0.0;
  double v_row = 0.0;  // pixels per frame
  double v_col = 0.0;
  double amplitude = 0.4;
  double radius = 2.0;  // blob extent = 2 sigma
};

struct SynthSpec {
  std::size_t height = 256;
  std::size_t width = 256;
  std::size_t frames = 100;
  Background background = Background::Smooth;
  double level = 0.3;         // constant value, or mean level of the smooth background
  double gradient = 0.2;      // smooth: peak-to-peak linear ramp
  double curvature = 0.15;    // smooth: quadratic bowl strength
  double drift = 0.02;        // smooth: additive brightness change over the sequence
  std::size_t btr_patch = 60;  // low-rank: patch size and temporal size of the planted tensors
  std::size_t btr_temporal = 15;
  BtrRanks btr_ranks{};
  double noise_sigma = 0.02;
  std::vector<SynthTarget> targets;
  std::uint64_t seed = 0;

  void validate() const {
    if (height == 0 || width == 0 || frames == 0) fail(ErrorKind::Spec, "frame size and count must be positive");
    if (!(noise_sigma >= 0.0)) fail(ErrorKind::Spec, "noise sigma must be nonnegative");
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const auto& t = targets[k];
      if (!(t.radius > 0.0)) fail(ErrorKind::Spec, "target radius must be positive");
      for (std::size_t f : {std::size_t{0}, frames - 1}) {
        const double r = t.row + t.v_row * static_cast<double>(f);
        const double c = t.col + t.v_col * static_cast<double>(f);
        if (r < 0.0 || c < 0.0 || r > static_cast<double>(height - 1) || c > static_cast<double>(width - 1))
          fail(ErrorKind::Spec, "target " + std::to_string(k) + " leaves the frame by frame " + std::to_string(f));
      }
    }
    if (background == Background::LowRankBtr) {
      PatchConfig{btr_patch, btr_patch, btr_temporal}.validate(height, width, frames);
    }
  }
};

struct SynthSequence {
  std::vector<Frame> frames;
  GroundTruth truth;
  std::vector<Frame> clean_background;
};

/// BTR tensor with i.i.d. uniform [0, 1) cores, scaled so its maximum is 1.
inline DenseTensor planted_btr_tensor(std::size_t nw, std::size_t nt, std::size_t np, const BtrRanks& ranks,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BTRFactors f = make_factors(nw, nt, np, ranks, 0.0);
  for (std::size_t k = 0; k < 6; ++k)
    for (double& v : f.core(k).data()) v = u(rng);
  DenseTensor x = btr_compose(f);
  const double peak = *std::max_element(x.data().begin(), x.data().end());
  if (peak > 0.0) x *= 1.0 / peak;
  return x;
}

namespace detail {

inline std::vector<Frame> smooth_background(const SynthSpec& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double angle = 2.0 * std::numbers::pi * u(rng);
  const double cy = 0.3 + 0.4 * u(rng), cx = 0.3 + 0.4 * u(rng);
  const double gr = std::cos(angle), gc = std::sin(angle);
  std::vector<Frame> out;
  for (std::size_t t = 0; t < s.frames; ++t) {
    Frame f(s.height, s.width);
    const double shift = s.frames > 1 ? s.drift * (static_cast<double>(t) / static_cast<double>(s.frames - 1) - 0.5) : 0.0;
    for (std::size_t r = 0; r < s.height; ++r)
      for (std::size_t c = 0; c < s.width; ++c) {
        const double y = static_cast<double>(r) / static_cast<double>(s.height) - 0.5;
        const double x = static_cast<double>(c) / static_cast<double>(s.width) - 0.5;
        const double dy = y + 0.5 - cy, dx = x + 0.5 - cx;
        f.at(r, c) = s.level + s.gradient * (gr * y + gc * x) + s.curvature * (dy * dy + dx * dx) + shift;
      }
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<Frame> btr_background(const SynthSpec& s) {
  const PatchConfig cfg{s.btr_patch, s.btr_patch, s.btr_temporal};
  const auto origins = patch_grid(s.height, s.width, cfg);
  std::vector<Frame> out(s.frames, Frame(s.height, s.width));
  const auto starts = window_starts(s.frames, s.btr_temporal);
  for (std::size_t w = 0; w < starts.size(); ++w) {
    PatchTensor4D pt{planted_btr_tensor(s.btr_patch, s.btr_temporal, origins.size(), s.btr_ranks, s.seed * 1000003u + w),
                     {s.height, s.width, s.btr_patch, s.btr_temporal, starts[w], origins}};
    pt.tensor *= s.level;
    auto frames = reconstruct(pt);
    for (std::size_t t = 0; t < frames.size(); ++t) out[starts[w] + t] = std::move(frames[t]);
  }
  return out;
}

}  // namespace detail

inline SynthSequence synth_sequence(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  SynthSequence seq;
  switch (spec.background) {
    case Background::Constant:
      seq.clean_background.assign(spec.frames, Frame(spec.height, spec.width, spec.level));
      break;
    case Background::Smooth:
      seq.clean_background = detail::smooth_background(spec, rng);
      break;
    case Background::LowRankBtr:
      seq.clean_background = detail::btr_background(spec);
      break;
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  seq.truth.targets.resize(spec.targets.empty() ? 0 : spec.frames);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    Frame f = seq.clean_background[t];
    for (const auto& tg : spec.targets) {
      const double r0 = tg.row + tg.v_row * static_cast<double>(t);
      const double c0 = tg.col + tg.v_col * static_cast<double>(t);
      seq.truth.targets[t].push_back({r0, c0, std::nullopt, std::nullopt});
      const double sigma = tg.radius / 2.0;
      const auto reach = static_cast<long>(std::ceil(3.0 * sigma));
      const long rc = std::lround(r0), cc = std::lround(c0);
      for (long r = std::max(0L, rc - reach); r <= std::min<long>(static_cast<long>(spec.height) - 1, rc + reach); ++r)
        for (long c = std::max(0L, cc - reach); c <= std::min<long>(static_cast<long>(spec.width) - 1, cc + reach); ++c) {
          const double dr = static_cast<double>(r) - r0, dc = static_cast<double>(c) - c0;
          f.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) +=
              tg.amplitude * std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
        }
    }
    for (double& v : f.pixels) {
      if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise(rng);
      v = std::clamp(v, 0.0, 1.0);
    }
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

}  // namespace btristd
