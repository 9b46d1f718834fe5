#pragma once

// Dense N-dimensional tensors, matricization and contraction.
//
// Storage is first-index-fastest everywhere: entry (i0, i1, ..., iN-1) lives at
// i0 + I0*(i1 + I1*(i2 + ...)). Modes are numbered from 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "btristd/error.hpp"

namespace btristd {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(std::span<const std::size_t> shape) {
  std::string s = "[";
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k) s += "x";
    s += std::to_string(shape[k]);
  }
  return s + "]";
}

class DenseTensor {
 public:
  /// Scalar zero (shape [1]).
  DenseTensor() : shape_{1}, data_(1, 0.0) {}

  explicit DenseTensor(Shape shape, double fill = 0.0) : shape_(std::move(shape)) {
    check_shape();
    data_.assign(numel(shape_), fill);
  }

  DenseTensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != numel(shape_))
      fail(ErrorKind::Shape, "data length " + std::to_string(data_.size()) + " does not match shape " +
                                 shape_string(shape_));
  }

  static DenseTensor ones(Shape shape) { return DenseTensor(std::move(shape), 1.0); }

  std::size_t order() const noexcept { return shape_.size(); }
  const Shape& shape() const noexcept { return shape_; }
  std::size_t extent(std::size_t mode) const { return shape_.at(mode); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() & noexcept { return data_; }
  std::span<const double> data() const& noexcept { return data_; }
  std::span<const double> data() const&& = delete;
  const std::vector<double>& values() const& noexcept { return data_; }
  const std::vector<double>& values() const&& = delete;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  template <typename... Idx>
  double& operator()(Idx... idx) {
    return data_[offset_of(idx...)];
  }
  template <typename... Idx>
  double operator()(Idx... idx) const {
    return data_[offset_of(idx...)];
  }

  std::size_t offset(std::span<const std::size_t> index) const {
    std::size_t off = 0;
    std::size_t stride = 1;
    for (std::size_t m = 0; m < shape_.size(); ++m) {
      off += index[m] * stride;
      stride *= shape_[m];
    }
    return off;
  }

  Shape strides() const {
    Shape s(shape_.size());
    std::size_t stride = 1;
    for (std::size_t m = 0; m < shape_.size(); ++m) {
      s[m] = stride;
      stride *= shape_[m];
    }
    return s;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  DenseTensor& operator+=(const DenseTensor& other) {
    require_same_shape(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  DenseTensor& operator-=(const DenseTensor& other) {
    require_same_shape(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }
  DenseTensor& operator*=(double c) {
    for (double& v : data_) v *= c;
    return *this;
  }

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  template <typename... Idx>
  std::size_t offset_of(Idx... idx) const {
    const std::size_t index[] = {static_cast<std::size_t>(idx)...};
    std::size_t off = 0;
    std::size_t stride = 1;
    for (std::size_t m = 0; m < sizeof...(Idx); ++m) {
      off += index[m] * stride;
      stride *= shape_[m];
    }
    return off;
  }

  void check_shape() const {
    if (shape_.empty()) fail(ErrorKind::Shape, "tensor order must be at least 1");
    for (std::size_t e : shape_)
      if (e == 0) fail(ErrorKind::Shape, "zero extent in shape " + shape_string(shape_));
  }

  void require_same_shape(const DenseTensor& other) const {
    if (other.shape_ != shape_)
      fail(ErrorKind::Shape, "shape mismatch " + shape_string(shape_) + " vs " + shape_string(other.shape_));
  }

  Shape shape_;
  std::vector<double> data_;
};

inline DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
inline DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
inline DenseTensor operator*(double c, DenseTensor a) { return a *= c; }

/// Column-major (row index fastest) dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) fail(ErrorKind::Shape, "matrix data length does not match rows x cols");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r + rows_ * c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r + rows_ * c]; }

  std::span<double> data() & noexcept { return data_; }
  std::span<const double> data() const& noexcept { return data_; }
  std::span<const double> data() const&& = delete;
  std::vector<double>&& release() && { return std::move(data_); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Which modes become matrix rows and which become columns. Within each list the
/// first mode varies fastest.
struct ModePartition {
  std::vector<std::size_t> row_modes;
  std::vector<std::size_t> col_modes;

  void validate(std::size_t order) const {
    std::vector<int> seen(order, 0);
    for (const auto* list : {&row_modes, &col_modes}) {
      for (std::size_t m : *list) {
        if (m >= order) fail(ErrorKind::Partition, "mode " + std::to_string(m) + " out of range");
        if (seen[m]++) fail(ErrorKind::Partition, "mode " + std::to_string(m) + " listed twice");
      }
    }
    for (std::size_t m = 0; m < order; ++m)
      if (!seen[m]) fail(ErrorKind::Partition, "mode " + std::to_string(m) + " missing from partition");
  }
};

namespace detail {

// Visits every tensor entry in storage order together with its (row, col)
// position in the unfolding defined by `p`.
template <typename Fn>
void for_each_unfolded(const Shape& shape, const ModePartition& p, std::size_t& rows, std::size_t& cols, Fn&& fn) {
  const std::size_t order = shape.size();
  std::vector<std::size_t> row_step(order, 0), col_step(order, 0);
  rows = 1;
  for (std::size_t m : p.row_modes) {
    row_step[m] = rows;
    rows *= shape[m];
  }
  cols = 1;
  for (std::size_t m : p.col_modes) {
    col_step[m] = cols;
    cols *= shape[m];
  }

  const std::size_t total = numel(shape);
  std::vector<std::size_t> idx(order, 0);
  std::size_t r = 0, c = 0;
  for (std::size_t lin = 0; lin < total; ++lin) {
    fn(lin, r, c);
    for (std::size_t m = 0; m < order; ++m) {
      ++idx[m];
      r += row_step[m];
      c += col_step[m];
      if (idx[m] < shape[m]) break;
      r -= row_step[m] * shape[m];
      c -= col_step[m] * shape[m];
      idx[m] = 0;
    }
  }
}

}  // namespace detail

inline Matrix unfold(const DenseTensor& t, const ModePartition& p) {
  p.validate(t.order());
  std::size_t rows = 0, cols = 0;
  std::vector<double> out(t.size());
  const auto src = t.data();
  detail::for_each_unfolded(t.shape(), p, rows, cols,
                            [&](std::size_t lin, std::size_t r, std::size_t c) { out[r + rows * c] = src[lin]; });
  return Matrix(rows, cols, std::move(out));
}

inline DenseTensor fold(const Matrix& m, const ModePartition& p, const Shape& shape) {
  DenseTensor t(shape);
  p.validate(t.order());
  std::size_t rows = 1, cols = 1;
  for (std::size_t mode : p.row_modes) rows *= shape[mode];
  for (std::size_t mode : p.col_modes) cols *= shape[mode];
  if (rows != m.rows() || cols != m.cols())
    fail(ErrorKind::Shape, "matrix " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                               " cannot fold into " + shape_string(shape));
  auto dst = t.data();
  const auto src = m.data();
  detail::for_each_unfolded(shape, p, rows, cols,
                            [&](std::size_t lin, std::size_t r, std::size_t c) { dst[lin] = src[r + rows * c]; });
  return t;
}

/// Permute modes: result mode q is input mode perm[q].
inline DenseTensor permute(const DenseTensor& t, std::span<const std::size_t> perm) {
  ModePartition p{{perm.begin(), perm.end()}, {}};
  Matrix flat = unfold(t, p);
  Shape shape(perm.size());
  for (std::size_t q = 0; q < perm.size(); ++q) shape[q] = t.extent(perm[q]);
  return DenseTensor(std::move(shape), std::move(flat).release());
}

/// Sums x and y over paired modes x_modes[k] <-> y_modes[k]. The result keeps the
/// free modes of x (in order) followed by the free modes of y. A full
/// contraction returns a shape-[1] tensor.
inline DenseTensor contract(const DenseTensor& x, const DenseTensor& y, std::span<const std::size_t> x_modes,
                            std::span<const std::size_t> y_modes) {
  if (x_modes.size() != y_modes.size()) fail(ErrorKind::Contraction, "mode lists differ in length");
  std::vector<int> x_used(x.order(), 0), y_used(y.order(), 0);
  for (std::size_t k = 0; k < x_modes.size(); ++k) {
    if (x_modes[k] >= x.order() || y_modes[k] >= y.order()) fail(ErrorKind::Contraction, "mode out of range");
    if (x_used[x_modes[k]]++ || y_used[y_modes[k]]++) fail(ErrorKind::Contraction, "mode paired twice");
    if (x.extent(x_modes[k]) != y.extent(y_modes[k]))
      fail(ErrorKind::Contraction, "extent mismatch on paired modes " + std::to_string(x_modes[k]) + "/" +
                                       std::to_string(y_modes[k]));
  }

  const Shape xs = x.strides(), ys = y.strides();
  Shape out_shape;
  std::vector<std::size_t> step_x, step_y;
  for (std::size_t m = 0; m < x.order(); ++m)
    if (!x_used[m]) {
      out_shape.push_back(x.extent(m));
      step_x.push_back(xs[m]);
      step_y.push_back(0);
    }
  for (std::size_t m = 0; m < y.order(); ++m)
    if (!y_used[m]) {
      out_shape.push_back(y.extent(m));
      step_x.push_back(0);
      step_y.push_back(ys[m]);
    }

  // Offsets of every contracted multi-index, first pair fastest.
  std::vector<std::pair<std::size_t, std::size_t>> inner{{0, 0}};
  for (std::size_t k = 0; k < x_modes.size(); ++k) {
    const std::size_t ext = x.extent(x_modes[k]);
    std::vector<std::pair<std::size_t, std::size_t>> next;
    next.reserve(inner.size() * ext);
    for (std::size_t v = 0; v < ext; ++v)
      for (auto [ox, oy] : inner) next.emplace_back(ox + v * xs[x_modes[k]], oy + v * ys[y_modes[k]]);
    inner = std::move(next);
  }

  if (out_shape.empty()) {
    out_shape.push_back(1);
    step_x.push_back(0);
    step_y.push_back(0);
  }
  DenseTensor z(out_shape);
  const auto xd = x.data();
  const auto yd = y.data();
  auto zd = z.data();
  std::vector<std::size_t> idx(out_shape.size(), 0);
  std::size_t ox = 0, oy = 0;
  for (std::size_t lin = 0; lin < z.size(); ++lin) {
    double acc = 0.0;
    for (auto [ix, iy] : inner) acc += xd[ox + ix] * yd[oy + iy];
    zd[lin] = acc;
    for (std::size_t q = 0; q < out_shape.size(); ++q) {
      ++idx[q];
      ox += step_x[q];
      oy += step_y[q];
      if (idx[q] < out_shape[q]) break;
      ox -= step_x[q] * out_shape[q];
      oy -= step_y[q] * out_shape[q];
      idx[q] = 0;
    }
  }
  return z;
}

inline double squared_norm(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

inline double frobenius_norm(const DenseTensor& t) { return std::sqrt(squared_norm(t.data())); }

inline double l1_norm(const DenseTensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += std::abs(v);
  return s;
}

/// Squared Frobenius distance ||a - b||^2.
inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::Shape, "size mismatch in distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace btristd
