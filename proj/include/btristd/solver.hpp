#pragma once

// Low-rank + sparse separation of a 4D patch tensor D = B4D + T4D with a
// bilateral tensor-ring background model, solved by proximal alternating
// minimization (PAM). Every block update below is the exact minimizer of
//
//   f = a/2 ||B4D - A x3^1 B||^2 + l1 ||T4D||_1
//     + b1/2 ||A - TR(G1,G2,G3)||^2 + b2/2 ||B - TR(G4,G5,G6)||^2
//     + b3/2 ||D - (B4D + T4D)||^2
//
// in its own block plus the proximal term rho/2 ||. - previous||^2, so one full
// sweep never increases f.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "btristd/btr.hpp"
#include "btristd/error.hpp"
#include "btristd/linalg.hpp"
#include "btristd/patch.hpp"
#include "btristd/tensor.hpp"

namespace btristd {

/// lambda1 = H / sqrt(Nw * Nw * Nt).
inline double lambda_from_H(double H, std::size_t nw, std::size_t nt) {
  if (!(H > 0.0) || nw == 0 || nt == 0) fail(ErrorKind::Parameter, "H, Nw and Nt must be positive");
  return H / std::sqrt(static_cast<double>(nw) * static_cast<double>(nw) * static_cast<double>(nt));
}

struct SolverParams {
  double alpha = 1.0;
  double lambda1 = 0.1;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double beta3 = 2.0;
  double rho = 0.01;
  int max_iter = 20;
  double tol = 1e-3;  // 0 disables early stopping
  BtrRanks ranks{};
  std::optional<double> H;  // when set, overrides lambda1 via lambda_from_H

  void validate() const {
    for (double v : {alpha, lambda1, beta1, beta2, beta3, rho})
      if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::Parameter, "solver weights must be positive and finite");
    if (max_iter <= 0) fail(ErrorKind::Parameter, "max_iter must be positive");
    if (!(tol >= 0.0)) fail(ErrorKind::Parameter, "tol must be nonnegative");
    if (ranks.spatial == 0 || ranks.interaction == 0 || ranks.temporal == 0)
      fail(ErrorKind::Parameter, "ranks must be positive");
    if (H && !(*H > 0.0)) fail(ErrorKind::Parameter, "H must be positive");
  }

  double effective_lambda(std::size_t nw, std::size_t nt) const { return H ? lambda_from_H(*H, nw, nt) : lambda1; }
};

struct SolverState {
  DenseTensor A;  // Nw x Nw x R
  DenseTensor B;  // R x Nt x Np
  BTRFactors cores;
  DenseTensor background;  // B4D
  DenseTensor target;      // T4D
  int iter = 0;
  std::vector<double> objective_history;  // [0] at initialization, then one per sweep
};

/// B4D = D, T4D = 0, A and B all ones, and every core entry equal to 1/R of its
/// chain so that TR(G1..3) = A and TR(G4..6) = B at the start.
inline SolverState initial_state(const DenseTensor& data, const BtrRanks& ranks) {
  if (data.order() != 4) fail(ErrorKind::Shape, "solver input must be an order-4 tensor");
  if (data.extent(0) != data.extent(1)) fail(ErrorKind::Shape, "patch modes must be square");
  const std::size_t nw = data.extent(0), nt = data.extent(2), np = data.extent(3);
  SolverState s{DenseTensor::ones({nw, nw, ranks.interaction}),
                DenseTensor::ones({ranks.interaction, nt, np}),
                make_factors(nw, nt, np, ranks, 1.0),
                data,
                DenseTensor(data.shape()),
                0,
                {}};
  for (std::size_t k = 0; k < 6; ++k) {
    const double fill = 1.0 / static_cast<double>(k < 3 ? ranks.spatial : ranks.temporal);
    for (double& v : s.cores.core(k).data()) v = fill;
  }
  return s;
}

namespace detail {

inline void check_state(const SolverState& s, const DenseTensor& data) {
  if (data.order() != 4) fail(ErrorKind::Shape, "solver input must be an order-4 tensor");
  const std::size_t nw = data.extent(0), nt = data.extent(2), np = data.extent(3);
  const std::size_t r = s.cores.ranks.interaction;
  if (s.background.shape() != data.shape() || s.target.shape() != data.shape())
    fail(ErrorKind::Shape, "B4D/T4D shape differs from data");
  if (s.A.shape() != Shape{nw, nw, r} || s.B.shape() != Shape{r, nt, np})
    fail(ErrorKind::Shape, "auxiliary factor shapes inconsistent with data and ranks");
  s.cores.validate();
}

}  // namespace detail

inline double objective(const SolverState& s, const DenseTensor& data, const SolverParams& p) {
  detail::check_state(s, data);
  const DenseTensor low_rank = compose_pair(s.A, s.B);
  const DenseTensor left = tr_compose(s.cores.left);
  const DenseTensor right = tr_compose(s.cores.right);
  double fidelity = 0.0;
  const auto d = data.data(), b4 = s.background.data(), t4 = s.target.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = d[i] - b4[i] - t4[i];
    fidelity += r * r;
  }
  return 0.5 * p.alpha * squared_distance(s.background.data(), low_rank.data()) + p.lambda1 * l1_norm(s.target) +
         0.5 * p.beta1 * squared_distance(s.A.data(), left.data()) +
         0.5 * p.beta2 * squared_distance(s.B.data(), right.data()) + 0.5 * p.beta3 * fidelity;
}

/// A = (a X B^T + b1 C + rho A_prev)(a B B^T + (b1 + rho) I)^-1 with
/// X = [B4D]_(1,2|3,4), B = [B]_(1|2,3) and C = [TR(G1..3)]_(1,2|3).
inline DenseTensor update_A(const SolverState& s, const SolverParams& p) {
  const std::size_t nw2 = s.A.extent(0) * s.A.extent(1);
  const std::size_t r = s.A.extent(2);
  const auto X = as_eigen(s.background, nw2);
  const auto Bm = as_eigen(s.B, r);
  const DenseTensor left = tr_compose(s.cores.left);
  const auto C = as_eigen(left, nw2);
  const auto A_prev = as_eigen(s.A, nw2);

  const Eigen::MatrixXd rhs = p.alpha * (X * Bm.transpose()) + p.beta1 * C + p.rho * A_prev;
  Eigen::MatrixXd lhs = p.alpha * (Bm * Bm.transpose());
  lhs.diagonal().array() += p.beta1 + p.rho;

  DenseTensor out(s.A.shape());
  as_eigen(out, nw2) = detail::spd_solve_right(rhs, lhs);
  return out;
}

/// B = (a A^T A + (b2 + rho) I)^-1 (a A^T X + b2 D + rho B_prev) with
/// D = [TR(G4..6)]_(1|2,3).
inline DenseTensor update_B(const SolverState& s, const SolverParams& p) {
  const std::size_t nw2 = s.A.extent(0) * s.A.extent(1);
  const std::size_t r = s.A.extent(2);
  const auto X = as_eigen(s.background, nw2);
  const auto Am = as_eigen(s.A, nw2);
  const DenseTensor right = tr_compose(s.cores.right);
  const auto Dm = as_eigen(right, r);
  const auto B_prev = as_eigen(s.B, r);

  const Eigen::MatrixXd rhs = p.alpha * (Am.transpose() * X) + p.beta2 * Dm + p.rho * B_prev;
  Eigen::MatrixXd lhs = p.alpha * (Am.transpose() * Am);
  lhs.diagonal().array() += p.beta2 + p.rho;

  DenseTensor out(s.B.shape());
  as_eigen(out, r) = detail::spd_factor(lhs).solve(rhs);
  return out;
}

/// Core k in 0..5 (0..2 left chain against A with b1, 3..5 right chain against
/// B with b2):
///   G = (beta T_k M^T + rho G_prev)(beta M M^T + rho I)^-1
/// where T_k is the circular unfolding of the chain target and M the subchain
/// matrix. When M has fewer columns than rows the same minimizer is computed
/// in the column space: G = G_prev + beta (T_k - G_prev M)(beta M^T M + rho I)^-1 M^T.
inline DenseTensor update_core(const SolverState& s, const SolverParams& p, std::size_t k) {
  if (k > 5) fail(ErrorKind::Parameter, "core index must be in 0..5");
  const bool left = k < 3;
  const std::size_t kk = k % 3;
  const TRCores3& chain = left ? s.cores.left : s.cores.right;
  const DenseTensor& target = left ? s.A : s.B;
  const double beta = left ? p.beta1 : p.beta2;

  const DenseTensor& g = chain.cores[kk];
  const Matrix target_k = chain_unfolding(target, kk);
  const Matrix M = subchain_matrix(chain, kk);
  if (target_k.rows() != g.extent(1) || target_k.cols() != M.cols())
    fail(ErrorKind::Shape, "core " + std::to_string(k) + " does not match its chain target " + shape_string(target.shape()));
  const Matrix G_prev = core_matrix(g);
  const auto Tk = as_eigen(target_k);
  const auto Mm = as_eigen(M);
  const auto Gp = as_eigen(G_prev);

  Matrix G(G_prev.rows(), G_prev.cols());
  if (M.cols() < M.rows()) {
    Eigen::MatrixXd gram = beta * (Mm.transpose() * Mm);
    gram.diagonal().array() += p.rho;
    const Eigen::MatrixXd resid = beta * (Tk - Gp * Mm);
    as_eigen(G) = Gp + detail::spd_solve_right(resid, gram) * Mm.transpose();
  } else {
    Eigen::MatrixXd gram = beta * (Mm * Mm.transpose());
    gram.diagonal().array() += p.rho;
    const Eigen::MatrixXd rhs = beta * (Tk * Mm.transpose()) + p.rho * Gp;
    as_eigen(G) = detail::spd_solve_right(rhs, gram);
  }
  return core_from_matrix(G, g.extent(0), g.extent(2));
}

/// B4D = (a (A x3^1 B) + b3 (D - T4D) + rho B4D_prev) / (a + b3 + rho).
inline DenseTensor update_background(const SolverState& s, const DenseTensor& data, const SolverParams& p) {
  detail::check_state(s, data);
  DenseTensor out = compose_pair(s.A, s.B);
  const auto d = data.data(), t4 = s.target.data(), prev = s.background.data();
  auto o = out.data();
  const double denom = p.alpha + p.beta3 + p.rho;
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (p.alpha * o[i] + p.beta3 * (d[i] - t4[i]) + p.rho * prev[i]) / denom;
  return out;
}

/// Element-wise soft threshold sign(x) max(|x| - xi, 0).
inline DenseTensor shrink1(const DenseTensor& x, double xi) {
  if (!(xi >= 0.0)) fail(ErrorKind::Parameter, "shrink threshold must be nonnegative");
  DenseTensor out(x.shape());
  const auto in = x.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double mag = std::abs(in[i]) - xi;
    o[i] = mag > 0.0 ? std::copysign(mag, in[i]) : 0.0;
  }
  return out;
}

/// T4D = shrink1(T*, l1 / (b3 + rho)) with T* = (b3 (D - B4D) + rho T4D_prev) / (b3 + rho).
inline DenseTensor update_target(const SolverState& s, const DenseTensor& data, const SolverParams& p) {
  detail::check_state(s, data);
  DenseTensor center(data.shape());
  const auto d = data.data(), b4 = s.background.data(), prev = s.target.data();
  auto c = center.data();
  const double denom = p.beta3 + p.rho;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = (p.beta3 * (d[i] - b4[i]) + p.rho * prev[i]) / denom;
  return shrink1(center, p.lambda1 / denom);
}

struct SolveResult {
  DenseTensor background;
  DenseTensor target;
  SolverState state;
  bool converged = false;
};

using SweepObserver = std::function<void(const SolverState&)>;

/// Runs PAM sweeps (A, B, G1..G3, G4..G6, B4D, T4D) until max_iter or until the
/// relative changes of both T4D and B4D fall below tol.
inline SolveResult solve(const DenseTensor& data, SolverParams params, const SweepObserver& observer = {}) {
  params.validate();
  if (data.order() != 4) fail(ErrorKind::Shape, "solver input must be an order-4 tensor");
  if (!data.all_finite()) fail(ErrorKind::Input, "input tensor contains non-finite values");
  params.lambda1 = params.effective_lambda(data.extent(0), data.extent(2));

  constexpr double eps = 1e-12;
  SolverState s = initial_state(data, params.ranks);
  s.objective_history.push_back(objective(s, data, params));
  bool converged = false;
  for (int it = 0; it < params.max_iter; ++it) {
    s.A = update_A(s, params);
    s.B = update_B(s, params);
    for (std::size_t k = 0; k < 6; ++k) s.cores.core(k) = update_core(s, params, k);
    DenseTensor background = update_background(s, data, params);
    const double bg_change = std::sqrt(squared_distance(background.data(), s.background.data())) /
                             std::max(frobenius_norm(s.background), eps);
    s.background = std::move(background);
    DenseTensor target = update_target(s, data, params);
    const double t_change =
        std::sqrt(squared_distance(target.data(), s.target.data())) / std::max(frobenius_norm(s.target), eps);
    s.target = std::move(target);
    s.iter = it + 1;

    const double f = objective(s, data, params);
    if (!std::isfinite(f) || !s.background.all_finite() || !s.target.all_finite())
      fail(ErrorKind::Divergence, "non-finite values after sweep " + std::to_string(s.iter));
    s.objective_history.push_back(f);
    if (observer) observer(s);
    if (t_change < params.tol && bg_change < params.tol) {
      converged = true;
      break;
    }
  }
  return {s.background, s.target, std::move(s), converged};
}

inline SolveResult solve(const PatchTensor4D& data, const SolverParams& params, const SweepObserver& observer = {}) {
  return solve(data.tensor, params, observer);
}

}  // namespace btristd
