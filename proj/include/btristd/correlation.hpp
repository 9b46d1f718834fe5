#pragma once

// Per-dimension-pair structure of an order-4 tensor: for each pair of modes the
// tensor is cut into a sequence of matrix slices, and each slice is summarized
// by the energy share of its leading singular value and by how well its leading
// singular vector agrees with that of the next slice.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "btristd/error.hpp"
#include "btristd/linalg.hpp"
#include "btristd/tensor.hpp"

namespace btristd {

/// Two distinct modes i < j of an order-4 tensor (0-based).
struct DimPair {
  std::size_t i = 0;
  std::size_t j = 1;

  void validate(std::size_t order) const {
    if (i >= j || j >= order) fail(ErrorKind::Parameter, "dimension pair must satisfy i < j < order");
  }

  std::string label() const { return "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")"; }

  friend bool operator==(const DimPair&, const DimPair&) = default;
};

inline constexpr std::array<DimPair, 6> all_pairs{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// I_i x I_j slices, one per value of the remaining two modes (the lower of
/// them fastest).
inline std::vector<Matrix> slice_sequence(const DenseTensor& t, const DimPair& pair) {
  if (t.order() != 4) fail(ErrorKind::Shape, "slice sequence needs an order-4 tensor");
  pair.validate(4);
  std::vector<std::size_t> perm{pair.i, pair.j};
  for (std::size_t m = 0; m < 4; ++m)
    if (m != pair.i && m != pair.j) perm.push_back(m);
  const DenseTensor p = permute(t, perm);
  const std::size_t rows = t.extent(pair.i), cols = t.extent(pair.j), n = rows * cols;
  const auto d = p.data();
  std::vector<Matrix> slices;
  slices.reserve(p.size() / n);
  for (std::size_t off = 0; off < p.size(); off += n) slices.emplace_back(rows, cols, std::vector<double>(d.begin() + off, d.begin() + off + n));
  return slices;
}

/// sigma_1^2 / sum sigma_k^2, or 0 for an all-zero slice.
inline double energy_ratio(const Matrix& m) {
  const auto s = svd(m).s;
  double total = 0.0;
  for (double v : s) total += v * v;
  if (total == 0.0) return 0.0;
  return s.front() * s.front() / total;
}

enum class Side { Left, Right };

struct Consistency {
  double value = 0.0;     // |cos| between leading singular vectors
  bool unstable = false;  // sigma_1 and sigma_2 within 1e-10 in either slice
};

namespace detail {

struct Leading {
  std::vector<double> vec;
  std::vector<double> s;
  bool degenerate = false;
  bool unstable = false;
};

inline Leading leading_vector(const Matrix& m, Side side) {
  SvdResult r = svd(m);
  Leading out;
  out.s = r.s;
  out.degenerate = r.s.empty() || r.s.front() == 0.0;
  out.unstable = r.s.size() > 1 && r.s[0] - r.s[1] <= 1e-10 * std::max(r.s[0], 1.0);
  const Matrix& basis = side == Side::Left ? r.U : r.V;
  out.vec.assign(basis.data().begin(), basis.data().begin() + basis.rows());
  return out;
}

inline double abs_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return std::min(std::abs(s), 1.0);
}

}  // namespace detail

inline Consistency direction_consistency(const Matrix& m1, const Matrix& m2, Side side = Side::Left) {
  if (m1.rows() != m2.rows() || m1.cols() != m2.cols()) fail(ErrorKind::Shape, "slices differ in shape");
  const auto a = detail::leading_vector(m1, side);
  const auto b = detail::leading_vector(m2, side);
  if (a.degenerate || b.degenerate) fail(ErrorKind::Numerical, "direction of an all-zero slice is undefined");
  return {detail::abs_dot(a.vec, b.vec), a.unstable || b.unstable};
}

struct PairReport {
  DimPair pair;
  std::vector<double> energy_ratios;  // one per slice, 0 marks an all-zero slice
  std::vector<double> direction_cos;  // one per adjacent slice pair, 0 if either slice is all-zero
  std::size_t unstable = 0;           // adjacent pairs with a near-tied leading singular value
  double mean_energy = 0.0;           // over nondegenerate slices
  double mean_cos = 0.0;              // over adjacent pairs of nondegenerate slices
};

struct CorrelationReport {
  std::vector<PairReport> pairs;  // in all_pairs order

  const PairReport& at(const DimPair& p) const {
    for (const auto& r : pairs)
      if (r.pair == p) return r;
    fail(ErrorKind::Parameter, "pair " + p.label() + " not in report");
  }
};

inline PairReport analyze_pair(const DenseTensor& t, const DimPair& pair, Side side = Side::Left) {
  const auto slices = slice_sequence(t, pair);
  PairReport rep{pair, {}, {}, 0, 0.0, 0.0};
  std::vector<detail::Leading> lead;
  lead.reserve(slices.size());
  std::size_t n_energy = 0, n_cos = 0;
  for (const auto& m : slices) {
    lead.push_back(detail::leading_vector(m, side));
    const auto& l = lead.back();
    double total = 0.0;
    for (double v : l.s) total += v * v;
    const double ratio = l.degenerate ? 0.0 : l.s.front() * l.s.front() / total;
    rep.energy_ratios.push_back(ratio);
    if (!l.degenerate) {
      rep.mean_energy += ratio;
      ++n_energy;
    }
  }
  for (std::size_t k = 0; k + 1 < lead.size(); ++k) {
    const auto& a = lead[k];
    const auto& b = lead[k + 1];
    if (a.degenerate || b.degenerate) {
      rep.direction_cos.push_back(0.0);
      continue;
    }
    const double c = detail::abs_dot(a.vec, b.vec);
    rep.direction_cos.push_back(c);
    if (a.unstable || b.unstable) ++rep.unstable;
    rep.mean_cos += c;
    ++n_cos;
  }
  if (n_energy) rep.mean_energy /= static_cast<double>(n_energy);
  if (n_cos) rep.mean_cos /= static_cast<double>(n_cos);
  return rep;
}

inline CorrelationReport analyze(const DenseTensor& t, Side side = Side::Left) {
  if (t.order() != 4) fail(ErrorKind::Shape, "correlation analysis needs an order-4 tensor");
  CorrelationReport report;
  for (const auto& p : all_pairs) report.pairs.push_back(analyze_pair(t, p, side));
  return report;
}

}  // namespace btristd
