#pragma once

// Tensor-ring (TR) chains of three cores and the bilateral composition that
// joins a spatial chain and a temporal-patch chain through an interaction rank.
//
// A core is an order-3 tensor G(a, i, b): a is the incoming rank index, i the
// physical index, b the outgoing rank index. A three-core ring composes to
//   X(i, j, k) = sum_{a,b,c} G1(a,i,b) G2(b,j,c) G3(c,k,a).

#include <array>
#include <cstddef>
#include <string>

#include "btristd/error.hpp"
#include "btristd/linalg.hpp"
#include "btristd/tensor.hpp"

namespace btristd {

struct TRCores3 {
  std::array<DenseTensor, 3> cores;

  void validate() const {
    for (std::size_t k = 0; k < 3; ++k) {
      if (cores[k].order() != 3) fail(ErrorKind::Shape, "TR core " + std::to_string(k) + " is not order 3");
    }
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& next = cores[(k + 1) % 3];
      if (cores[k].extent(2) != next.extent(0))
        fail(ErrorKind::Shape, "TR rank mismatch between core " + std::to_string(k) + " and core " +
                                   std::to_string((k + 1) % 3));
    }
  }

  Shape outer_shape() const { return {cores[0].extent(1), cores[1].extent(1), cores[2].extent(1)}; }
};

/// (R1, R, R2): spatial-chain rank, interaction rank, temporal-patch-chain rank.
struct BtrRanks {
  std::size_t spatial = 6;
  std::size_t interaction = 3;
  std::size_t temporal = 30;

  friend bool operator==(const BtrRanks&, const BtrRanks&) = default;
};

/// Left chain (G1, G2, G3) composes to an Nw x Nw x R tensor, right chain
/// (G4, G5, G6) to an R x Nt x Np tensor.
struct BTRFactors {
  TRCores3 left;
  TRCores3 right;
  BtrRanks ranks;

  DenseTensor& core(std::size_t k) { return k < 3 ? left.cores[k] : right.cores[k - 3]; }
  const DenseTensor& core(std::size_t k) const { return k < 3 ? left.cores[k] : right.cores[k - 3]; }

  void validate() const {
    left.validate();
    right.validate();
    if (left.cores[2].extent(1) != ranks.interaction || right.cores[0].extent(1) != ranks.interaction)
      fail(ErrorKind::Shape, "interaction rank mismatch between the two chains");
    for (const auto& g : left.cores)
      if (g.extent(0) != ranks.spatial) fail(ErrorKind::Shape, "left core rank differs from R1");
    for (const auto& g : right.cores)
      if (g.extent(0) != ranks.temporal) fail(ErrorKind::Shape, "right core rank differs from R2");
  }
};

/// Factors for an Nw x Nw x Nt x Np tensor with every core entry set to `fill`.
inline BTRFactors make_factors(std::size_t nw, std::size_t nt, std::size_t np, const BtrRanks& r, double fill) {
  if (r.spatial == 0 || r.interaction == 0 || r.temporal == 0) fail(ErrorKind::Parameter, "ranks must be positive");
  const std::size_t r1 = r.spatial, r2 = r.temporal;
  return BTRFactors{
      TRCores3{{DenseTensor({r1, nw, r1}, fill), DenseTensor({r1, nw, r1}, fill),
                DenseTensor({r1, r.interaction, r1}, fill)}},
      TRCores3{{DenseTensor({r2, r.interaction, r2}, fill), DenseTensor({r2, nt, r2}, fill),
                DenseTensor({r2, np, r2}, fill)}},
      r};
}

inline DenseTensor tr_compose(const TRCores3& tr) {
  tr.validate();
  const auto& g1 = tr.cores[0];
  const auto& g2 = tr.cores[1];
  const auto& g3 = tr.cores[2];
  const std::size_t ra = g1.extent(0), ni = g1.extent(1), rb = g1.extent(2);
  const std::size_t nj = g2.extent(1), rc = g2.extent(2);
  const std::size_t nk = g3.extent(1);
  const auto d1 = g1.data();
  const auto d2 = g2.data();
  const auto d3 = g3.data();

  DenseTensor x({ni, nj, nk});
  std::vector<double> prod(ra * rc);  // P(a, c) = sum_b G1(a,i,b) G2(b,j,c)
  for (std::size_t j = 0; j < nj; ++j) {
    for (std::size_t i = 0; i < ni; ++i) {
      std::fill(prod.begin(), prod.end(), 0.0);
      for (std::size_t c = 0; c < rc; ++c)
        for (std::size_t b = 0; b < rb; ++b) {
          const double v2 = d2[b + rb * (j + nj * c)];
          const double* col1 = &d1[ra * (i + ni * b)];
          double* out = &prod[ra * c];
          for (std::size_t a = 0; a < ra; ++a) out[a] += col1[a] * v2;
        }
      for (std::size_t k = 0; k < nk; ++k) {
        double acc = 0.0;
        for (std::size_t a = 0; a < ra; ++a)
          for (std::size_t c = 0; c < rc; ++c) acc += prod[a + ra * c] * d3[c + rc * (k + nk * a)];
        x(i, j, k) = acc;
      }
    }
  }
  return x;
}

/// a x_{last}^{first} b: contracts the last mode of `a` with the first mode of `b`.
inline DenseTensor compose_pair(const DenseTensor& a, const DenseTensor& b) {
  const std::size_t r = a.shape().back();
  if (b.extent(0) != r) fail(ErrorKind::Shape, "interaction extents differ");
  Shape shape(a.shape().begin(), a.shape().end() - 1);
  shape.insert(shape.end(), b.shape().begin() + 1, b.shape().end());
  DenseTensor x(shape);
  const std::size_t rows = a.size() / r;
  as_eigen(x, rows).noalias() = as_eigen(a, rows) * as_eigen(b, r);
  return x;
}

inline DenseTensor btr_compose(const BTRFactors& f) {
  f.validate();
  return compose_pair(tr_compose(f.left), tr_compose(f.right));
}

/// I_k x (Ra*Rb) matrix of a core, column (a, b) with a fastest.
inline Matrix core_matrix(const DenseTensor& core) { return unfold(core, {{1}, {0, 2}}); }

inline DenseTensor core_from_matrix(const Matrix& m, std::size_t rank_in, std::size_t rank_out) {
  return fold(m, {{1}, {0, 2}}, {rank_in, m.rows(), rank_out});
}

/// Unfolding of a chain target with mode k as rows and the remaining modes, in
/// circular order (k+1 fastest), as columns.
inline Matrix chain_unfolding(const DenseTensor& x, std::size_t k) {
  if (x.order() != 3 || k > 2) fail(ErrorKind::Shape, "chain unfolding needs an order-3 tensor and k in 0..2");
  return unfold(x, {{k}, {(k + 1) % 3, (k + 2) % 3}});
}

/// Subchain matrix M_k such that chain_unfolding(tr_compose(cores), k) equals
/// core_matrix(G_k) * M_k. Rows are (a, b) with a fastest, columns are
/// (i_{k+1}, i_{k+2}) with i_{k+1} fastest, and
///   M_k((a,b), (i1,i2)) = sum_c G_{k+1}(b, i1, c) G_{k+2}(c, i2, a).
inline Matrix subchain_matrix(const TRCores3& tr, std::size_t k) {
  if (k > 2) fail(ErrorKind::Shape, "subchain index must be 0, 1 or 2");
  tr.validate();
  const auto& gb = tr.cores[(k + 1) % 3];
  const auto& gc = tr.cores[(k + 2) % 3];
  const std::size_t rb = gb.extent(0), n1 = gb.extent(1), rm = gb.extent(2);
  const std::size_t n2 = gc.extent(1), ra = gc.extent(2);
  const auto db = gb.data();
  const auto dc = gc.data();

  Matrix m(ra * rb, n1 * n2);
  for (std::size_t i2 = 0; i2 < n2; ++i2)
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
      double* col = &m.data()[ra * rb * (i1 + n1 * i2)];
      for (std::size_t c = 0; c < rm; ++c)
        for (std::size_t b = 0; b < rb; ++b) {
          const double vb = db[b + rb * (i1 + n1 * c)];
          for (std::size_t a = 0; a < ra; ++a) col[a + ra * b] += vb * dc[c + rm * (i2 + n2 * a)];
        }
    }
  return m;
}

}  // namespace btristd
