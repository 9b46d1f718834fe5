#pragma once

// Whole-sequence detection: split into temporal windows, decompose each
// window's patch tensor, and fold background and |target| back into frames.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "btristd/evaluation.hpp"
#include "btristd/io.hpp"
#include "btristd/patch.hpp"
#include "btristd/solver.hpp"

namespace btristd {

struct RunConfig {
  SolverParams solver{};
  PatchConfig patch{};
  Overlap overlap = Overlap::Mean;
  EvalOptions eval{};
  Side corr_side = Side::Left;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  std::filesystem::path input;
  std::filesystem::path ground_truth;
  std::filesystem::path output = "out";

  void validate() const {
    solver.validate();
    if (jobs == 0) fail(ErrorKind::Parameter, "jobs must be positive");
    if (eval.thresholds < 2) fail(ErrorKind::Parameter, "at least two thresholds are required");
    if (!(eval.hit_radius >= 0.0)) fail(ErrorKind::Parameter, "hit radius must be nonnegative");
  }
};

struct DetectionResult {
  std::vector<Frame> background;
  std::vector<Frame> target;  // |T| folded back to frames
  std::vector<TimingRow> timing;
};

namespace detail {

struct WindowOutput {
  std::vector<Frame> background;
  std::vector<Frame> target;
  TimingRow timing;
};

inline WindowOutput run_window(const std::vector<Frame>& frames, const RunConfig& cfg, std::size_t index,
                               std::size_t start) {
  PatchTensor4D pt = build_tensor(frames, cfg.patch, start);
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult res = solve(pt, cfg.solver);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (double& v : res.target.data()) v = std::abs(v);
  WindowOutput out;
  out.background = reconstruct({std::move(res.background), pt.provenance}, cfg.overlap);
  out.target = reconstruct({std::move(res.target), pt.provenance}, cfg.overlap);
  out.timing = {index, start, res.state.iter, res.converged, secs};
  return out;
}

}  // namespace detail

/// Frames covered by more than one window get the mean of the window outputs.
/// Windows run on up to cfg.jobs threads; the merge happens afterwards in window
/// order, so results do not depend on the thread count.
inline DetectionResult detect_sequence(const std::vector<Frame>& frames, const RunConfig& cfg) {
  cfg.validate();
  if (frames.empty()) fail(ErrorKind::Input, "empty frame sequence");
  cfg.patch.validate(frames.front().height, frames.front().width, frames.size());
  const auto starts = window_starts(frames.size(), cfg.patch.temporal_size);

  std::vector<std::optional<detail::WindowOutput>> outputs(starts.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t w; (w = next++) < starts.size();) {
      try {
        outputs[w] = detail::run_window(frames, cfg, w, starts[w]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = starts.size();
      }
    }
  };
  const std::size_t n_threads = std::min(cfg.jobs, starts.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  const std::size_t h = frames.front().height, w = frames.front().width;
  DetectionResult result{std::vector<Frame>(frames.size(), Frame(h, w)), std::vector<Frame>(frames.size(), Frame(h, w)),
                         {}};
  std::vector<unsigned> cover(frames.size(), 0);
  for (std::size_t k = 0; k < starts.size(); ++k) {
    auto& o = *outputs[k];
    for (std::size_t t = 0; t < o.background.size(); ++t) {
      auto& bg = result.background[starts[k] + t].pixels;
      auto& tg = result.target[starts[k] + t].pixels;
      for (std::size_t p = 0; p < bg.size(); ++p) {
        bg[p] += o.background[t].pixels[p];
        tg[p] += o.target[t].pixels[p];
      }
      ++cover[starts[k] + t];
    }
    result.timing.push_back(o.timing);
  }
  for (std::size_t f = 0; f < frames.size(); ++f)
    if (cover[f] > 1) {
      for (double& v : result.background[f].pixels) v /= cover[f];
      for (double& v : result.target[f].pixels) v /= cover[f];
    }
  return result;
}

}  // namespace btristd
