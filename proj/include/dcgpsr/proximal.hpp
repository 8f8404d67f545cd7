#pragma once

// Soft-thresholding (proximal gradient) solvers: ISTA for the l1 problem and
// the DC variant whose convex subproblems are solved the same way.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "dcgpsr/problem.hpp"
#include "dcgpsr/sparsity.hpp"

namespace dcgpsr {

/// Called after every accepted inner step with the subproblem objective
/// 1/2||y - Phi x||^2 + rho||x||_1 - s^T x.
using ProximalObserver =
    std::function<void(int outer, std::size_t inner, double objective, const Eigen::VectorXd& x)>;

/// One proximal-gradient step on 1/2||y - Phi x||^2 - s^T x + rho ||x||_1:
///   soft_threshold(x - (Phi^T Phi x - Phi^T y - s) / lipschitz, rho / lipschitz).
inline Eigen::VectorXd proximal_step(const Eigen::VectorXd& x, const Eigen::VectorXd& s,
                                     const SparseProblem& p, double lipschitz) {
  require_signal_length(x, p, "proximal_step");
  require_signal_length(s, p, "proximal_step (s)");
  if (!(lipschitz > 0.0)) throw InvalidInput("proximal_step: Lipschitz bound must be > 0");
  const Eigen::VectorXd grad = p.phi().transpose() * (p.phi() * x - p.y()) - s;
  return soft_threshold(x - grad / lipschitz, p.rho() / lipschitz);
}

/// Step size bound used by ISTA and dc_proximal.
inline double proximal_lipschitz(const SparseProblem& p, const SolverOptions& opts) {
  const double l = p.gram_norm() * opts.lipschitz_margin;
  if (!(l > 0.0)) throw NumericalFailure("Lipschitz estimate is zero", 0);
  return l;
}

namespace detail {

struct ProximalSolve {
  Eigen::VectorXd x;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Iterates proximal_step from x0 with linear term s. Steps that fail to
/// decrease the objective by a relative inner_tol are not taken.
inline ProximalSolve proximal_solve(const SparseProblem& p, const Eigen::VectorXd& s,
                                    const Eigen::VectorXd& x0, const SolverOptions& opts,
                                    double lipschitz, int outer,
                                    const ProximalObserver& observer) {
  const double floor = std::numeric_limits<double>::epsilon() * 0.5 * p.y().squaredNorm();
  const double thresh = p.rho() / lipschitz;
  auto objective = [&](const Eigen::VectorXd& r, const Eigen::VectorXd& x) {
    return 0.5 * r.squaredNorm() + p.rho() * x.lpNorm<1>() - s.dot(x);
  };

  ProximalSolve out{x0, 0, false};
  Eigen::VectorXd r = p.phi() * out.x - p.y();
  double value = objective(r, out.x);
  require_finite(value, "proximal solver", 0);

  for (int it = 1; it <= opts.inner_max; ++it) {
    const Eigen::VectorXd grad = p.phi().transpose() * r - s;
    Eigen::VectorXd x_next = soft_threshold(out.x - grad / lipschitz, thresh);
    Eigen::VectorXd r_next = p.phi() * x_next - p.y();
    const double next_value = objective(r_next, x_next);
    require_finite(next_value, "proximal solver", static_cast<std::size_t>(it));
    if (small_decrease(value, next_value, opts.inner_tol, floor)) {
      out.converged = true;
      break;
    }
    out.x = std::move(x_next);
    r = std::move(r_next);
    value = next_value;
    ++out.iterations;
    if (observer) observer(outer, out.iterations, value, out.x);
  }
  return out;
}

}  // namespace detail

/// ISTA for 1/2||y - Phi x||^2 + rho ||x||_1 with step 1/L, L the power-method
/// estimate of ||Phi^T Phi|| times lipschitz_margin. The trace has one row per
/// step.
inline ReconResult ista(const SparseProblem& p, const Eigen::VectorXd& x0,
                        const SolverOptions& opts,
                        const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt) {
  opts.validate();
  require_signal_length(x0, p, "ista");
  if (ground_truth) require_signal_length(*ground_truth, p, "ista");

  ReconResult res;
  detail::record(res.trace, x0, p, ground_truth, 0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.n());
  auto inner = detail::proximal_solve(
      p, zero, x0, opts, proximal_lipschitz(p, opts), 1,
      [&](int, std::size_t, double, const Eigen::VectorXd& x) {
        detail::record(res.trace, x, p, ground_truth, 1);
      });
  res.x_hat = std::move(inner.x);
  res.converged = inner.converged;
  res.outer_iters = 1;
  return res;
}

inline ReconResult ista(const SparseProblem& p, const SolverOptions& opts = {},
                        const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt) {
  return ista(p, Eigen::VectorXd::Zero(p.n()), opts, ground_truth);
}

/// DC loop on F with the convex subproblem
///   min 1/2||y - Phi x||^2 - s^T x + rho ||x||_1,  s = rho * w,
/// w a subgradient of ||.||_{K,1} at the previous iterate, solved by proximal
/// gradient warm-started from that iterate. Same outer stopping rule as
/// dc_gpsr (distance between successive split iterates).
inline ReconResult dc_proximal(const SparseProblem& p, const Eigen::VectorXd& x0,
                               const SolverOptions& opts,
                               const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt,
                               const ProximalObserver& observer = {}) {
  opts.validate();
  require_signal_length(x0, p, "dc_proximal");
  if (ground_truth) require_signal_length(*ground_truth, p, "dc_proximal");

  const double lipschitz = proximal_lipschitz(p, opts);
  ReconResult res;
  Eigen::VectorXd x = x0;
  detail::record(res.trace, x, p, ground_truth, 0);

  for (int t = 1; t <= opts.outer_max; ++t) {
    const Eigen::VectorXd s = p.rho() * top_k1_subgradient(x, p.k()).w;
    auto inner = detail::proximal_solve(p, s, x, opts, lipschitz, t, observer);
    // ||z^t - z^{t-1}|| for the complementary splits of both iterates.
    const auto a = split_pos_neg(inner.x), b = split_pos_neg(x);
    const double step = std::sqrt((a.u - b.u).squaredNorm() + (a.v - b.v).squaredNorm());
    x = std::move(inner.x);
    res.outer_iters = t;
    detail::record(res.trace, x, p, ground_truth, inner.iterations);
    if (step <= opts.outer_tol) {
      res.converged = true;
      break;
    }
  }
  res.x_hat = std::move(x);
  return res;
}

inline ReconResult dc_proximal(const SparseProblem& p, const SolverOptions& opts = {},
                               const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt) {
  return dc_proximal(p, Eigen::VectorXd::Zero(p.n()), opts, ground_truth);
}

}  // namespace dcgpsr
