#pragma once

// Threshold-sweep scoring of target maps against ground truth: probability of
// detection Pd (detected targets / actual targets) and false-alarm rate Pf
// (false pixels / total pixels) per threshold, and the AUC family derived from
// the three projections of the (tau, Pd, Pf) curve.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "btristd/error.hpp"
#include "btristd/patch.hpp"

namespace btristd {

struct Target {
  double row = 0.0;
  double col = 0.0;
  std::optional<double> box_h;  // box height/width, centered on (row, col)
  std::optional<double> box_w;
};

/// targets[f] lists the targets of frame f. Missing trailing frames have none.
struct GroundTruth {
  std::vector<std::vector<Target>> targets;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& f : targets) n += f.size();
    return n;
  }
  std::span<const Target> frame(std::size_t f) const {
    if (f >= targets.size()) return {};
    return targets[f];
  }
};

struct EvalOptions {
  std::size_t thresholds = 100;
  double hit_radius = 3.0;  // Chebyshev radius around a centroid without a box
};

/// True if pixel (r, c) lies in the target's neighborhood.
inline bool in_neighborhood(const Target& t, std::size_t r, std::size_t c, double hit_radius) {
  const double dr = std::abs(static_cast<double>(r) - t.row);
  const double dc = std::abs(static_cast<double>(c) - t.col);
  if (t.box_h && t.box_w) return dr <= *t.box_h / 2.0 && dc <= *t.box_w / 2.0;
  return dr <= hit_radius && dc <= hit_radius;
}

struct Detection {
  std::size_t detected = 0;
  std::size_t false_pixels = 0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Pixels with score >= tau are hot. A target is detected when a hot pixel falls
/// in its neighborhood; hot pixels outside every neighborhood are false.
inline Detection detect_at_threshold(const Frame& score, double tau, std::span<const Target> targets,
                                     double hit_radius = 3.0) {
  Detection d;
  std::vector<char> hit(targets.size(), 0);
  for (std::size_t r = 0; r < score.height; ++r)
    for (std::size_t c = 0; c < score.width; ++c) {
      if (!(score.at(r, c) >= tau)) continue;
      bool inside = false;
      for (std::size_t k = 0; k < targets.size(); ++k)
        if (in_neighborhood(targets[k], r, c, hit_radius)) {
          inside = true;
          hit[k] = 1;
        }
      if (!inside) ++d.false_pixels;
    }
  for (char h : hit) d.detected += h;
  return d;
}

/// Min-max normalization to [0, 1] over the whole sequence. A constant sequence
/// maps to all zeros.
inline std::vector<Frame> normalize_scores(std::vector<Frame> frames) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& f : frames)
    for (double v : f.pixels) {
      if (!std::isfinite(v)) fail(ErrorKind::Input, "non-finite score");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const double span = hi - lo;
  for (auto& f : frames)
    for (double& v : f.pixels) v = span > 0.0 ? (v - lo) / span : 0.0;
  return frames;
}

inline std::vector<double> threshold_grid(std::size_t n) {
  if (n < 2) fail(ErrorKind::Parameter, "at least two thresholds are required");
  std::vector<double> tau(n);
  for (std::size_t k = 0; k < n; ++k) tau[k] = static_cast<double>(k) / static_cast<double>(n - 1);
  return tau;
}

/// Trapezoidal area under y(x) for x ascending.
inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double a = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) a += 0.5 * (x[k] - x[k - 1]) * (y[k] + y[k - 1]);
  return a;
}

inline constexpr double snpr_cap = 1e9;

struct AucFamily {
  double snpr = 0.0;
  double tdbs = 0.0;
  double odp = 0.0;
  bool snpr_capped = false;  // AUC_(F,tau) was zero or the ratio exceeded snpr_cap
};

/// SNPR = AUC_(D,tau) / AUC_(F,tau), TDBS = AUC_(D,tau) - AUC_(F,tau),
/// ODP = AUC_(D,tau) + 1 - AUC_(F,tau).
inline AucFamily auc_family(double auc_dtau, double auc_ftau) {
  if (!(auc_ftau >= 0.0) || !(auc_dtau >= 0.0)) fail(ErrorKind::Parameter, "AUC values must be nonnegative");
  AucFamily f;
  f.tdbs = auc_dtau - auc_ftau;
  f.odp = auc_dtau + (1.0 - auc_ftau);
  if (auc_ftau == 0.0 || auc_dtau / auc_ftau > snpr_cap) {
    f.snpr = snpr_cap;
    f.snpr_capped = true;
  } else {
    f.snpr = auc_dtau / auc_ftau;
  }
  return f;
}

struct RocCurve {
  std::vector<double> thresholds;  // ascending in [0, 1]
  std::vector<double> pd;
  std::vector<double> pf;
  double auc_df = 0.0;    // Pd against Pf, anchored at (0,0) and (1,1)
  double auc_dtau = 0.0;  // Pd against tau
  double auc_ftau = 0.0;  // Pf against tau
  AucFamily family;
};

inline double auc_df(std::span<const double> pf, std::span<const double> pd) {
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {1.0, 1.0}};
  for (std::size_t k = 0; k < pf.size(); ++k) pts.emplace_back(pf[k], pd[k]);
  std::sort(pts.begin(), pts.end());
  std::vector<double> x, y;
  for (auto [a, b] : pts) {
    x.push_back(a);
    y.push_back(b);
  }
  return trapezoid(x, y);
}

/// Sweeps thresholds over score maps already normalized to [0, 1]. Counts are
/// identical to calling detect_at_threshold per frame and threshold.
inline RocCurve roc_sweep(std::span<const Frame> scores, const GroundTruth& gt, const EvalOptions& opt = {}) {
  const std::size_t actual = gt.total();
  if (actual == 0) fail(ErrorKind::UndefinedPd, "ground truth contains no targets");
  if (gt.targets.size() > scores.size()) fail(ErrorKind::Input, "ground truth refers to frames beyond the score maps");
  const auto tau = threshold_grid(opt.thresholds);
  const std::size_t n = tau.size();

  // hot_at[k] counts pixels hot at tau[k]: a score s is hot for every k with tau[k] <= s.
  auto levels = [&](double s) { return static_cast<std::size_t>(std::upper_bound(tau.begin(), tau.end(), s) - tau.begin()); };
  std::vector<std::size_t> false_count(n + 1, 0), det_count(n + 1, 0);
  std::size_t total_pixels = 0;
  for (std::size_t f = 0; f < scores.size(); ++f) {
    const Frame& s = scores[f];
    const auto targets = gt.frame(f);
    for (const auto& t : targets)
      if (t.row < 0 || t.col < 0 || t.row >= static_cast<double>(s.height) || t.col >= static_cast<double>(s.width))
        fail(ErrorKind::Input, "ground-truth target outside frame " + std::to_string(f));
    total_pixels += s.pixels.size();
    std::vector<double> best(targets.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < s.height; ++r)
      for (std::size_t c = 0; c < s.width; ++c) {
        const double v = s.at(r, c);
        bool inside = false;
        for (std::size_t k = 0; k < targets.size(); ++k)
          if (in_neighborhood(targets[k], r, c, opt.hit_radius)) {
            inside = true;
            best[k] = std::max(best[k], v);
          }
        if (!inside) ++false_count[levels(v)];
      }
    for (double b : best) ++det_count[levels(b)];
  }

  RocCurve c;
  c.thresholds = tau;
  c.pd.assign(n, 0.0);
  c.pf.assign(n, 0.0);
  // Pixels at level L are hot for thresholds 0..L-1.
  std::size_t hot_false = 0, hot_det = 0;
  for (std::size_t k = n; k-- > 0;) {
    hot_false += false_count[k + 1];
    hot_det += det_count[k + 1];
    c.pd[k] = static_cast<double>(hot_det) / static_cast<double>(actual);
    c.pf[k] = static_cast<double>(hot_false) / static_cast<double>(total_pixels);
  }
  c.auc_df = auc_df(c.pf, c.pd);
  c.auc_dtau = trapezoid(c.thresholds, c.pd);
  c.auc_ftau = trapezoid(c.thresholds, c.pf);
  c.family = auc_family(c.auc_dtau, c.auc_ftau);
  return c;
}

}  // namespace btristd
