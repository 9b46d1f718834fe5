#pragma once

// Small dense linear-algebra helpers on top of Eigen. Matrix and DenseTensor
// are column-major, so both map onto Eigen::MatrixXd without copies.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SVD>

#include <cmath>
#include <vector>

#include "btristd/error.hpp"
#include "btristd/tensor.hpp"

namespace btristd {

using EigenMap = Eigen::Map<Eigen::MatrixXd>;
using ConstEigenMap = Eigen::Map<const Eigen::MatrixXd>;

inline ConstEigenMap as_eigen(const Matrix& m) {
  return ConstEigenMap(m.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}
inline EigenMap as_eigen(Matrix& m) {
  return EigenMap(m.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
}

/// View a tensor's storage as a rows x (size/rows) matrix.
inline ConstEigenMap as_eigen(const DenseTensor& t, std::size_t rows) {
  return ConstEigenMap(t.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.size() / rows));
}
inline EigenMap as_eigen(DenseTensor& t, std::size_t rows) {
  return EigenMap(t.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.size() / rows));
}

inline Matrix to_matrix(const Eigen::MatrixXd& m) {
  Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  as_eigen(out) = m;
  return out;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) fail(ErrorKind::Shape, "inner dimensions differ in matmul");
  Matrix out(a.rows(), b.cols());
  as_eigen(out).noalias() = as_eigen(a) * as_eigen(b);
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  as_eigen(out) = as_eigen(a).transpose();
  return out;
}

namespace detail {

inline Eigen::LLT<Eigen::MatrixXd> spd_factor(const Eigen::MatrixXd& lhs) {
  if (lhs.rows() != lhs.cols()) fail(ErrorKind::Numerical, "SPD solve needs a square matrix");
  const double scale = lhs.cwiseAbs().maxCoeff();
  if (!std::isfinite(scale)) fail(ErrorKind::Numerical, "non-finite entries in SPD system");
  if ((lhs - lhs.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
    fail(ErrorKind::Numerical, "matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(lhs);
  if (llt.info() != Eigen::Success) fail(ErrorKind::Numerical, "Cholesky factorization failed (not positive definite)");
  return llt;
}

/// Solves X * lhs = rhs for symmetric positive definite lhs.
inline Eigen::MatrixXd spd_solve_right(const Eigen::MatrixXd& rhs, const Eigen::MatrixXd& lhs) {
  return spd_factor(lhs).solve(rhs.transpose()).transpose();
}

}  // namespace detail

/// Solves lhs * S = rhs through a Cholesky factorization of lhs.
inline Matrix spd_solve(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.rows() != rhs.rows()) fail(ErrorKind::Shape, "right-hand side row count differs from system size");
  const auto llt = detail::spd_factor(as_eigen(lhs));
  return to_matrix(llt.solve(as_eigen(rhs)));
}

struct SvdResult {
  Matrix U;
  std::vector<double> s;  // nonincreasing
  Matrix V;
};

/// Thin SVD: U is rows x k, V is cols x k with k = min(rows, cols).
inline SvdResult svd(const Matrix& m) {
  const auto a = as_eigen(m);
  if (!a.allFinite()) fail(ErrorKind::Numerical, "SVD input contains non-finite values");
  Eigen::JacobiSVD<Eigen::MatrixXd> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) fail(ErrorKind::Numerical, "SVD did not converge");
  SvdResult out{to_matrix(solver.matrixU()), {}, to_matrix(solver.matrixV())};
  const auto& sv = solver.singularValues();
  out.s.assign(sv.data(), sv.data() + sv.size());
  return out;
}

}  // namespace btristd
