#pragma once

// Bound-constrained quadratic program arising from one DC step:
//
//   min_{z >= 0}  G(z) = 1/2 z^T B z + c^T z,   z = [u; v],  x = u - v,
//   B = [H -H; -H H],  H = Phi^T Phi,
//   c = [-Phi^T y; Phi^T y] + rho 1 - rho w_z.
//
// B is never formed. Every product with B goes through Phi twice.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "dcgpsr/errors.hpp"
#include "dcgpsr/problem.hpp"

namespace dcgpsr {

/// Per-step information passed to a BCQP observer.
struct BcqpStep {
  std::size_t iteration = 0;  // 1-based count of accepted steps
  double alpha = 0.0;         // step used for the projection
  double beta = 0.0;          // accepted fraction along z_half - z
  double objective = 0.0;     // G(z) after the step
};

using BcqpObserver = std::function<void(const BcqpStep&, const Eigen::VectorXd& z)>;

struct BcqpResult {
  Eigen::VectorXd z;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline void require_split_length(const Eigen::VectorXd& z, const SparseProblem& p,
                                 const char* what) {
  if (z.size() != 2 * p.n())
    throw InvalidDimension(std::string(what) + ": expected length " + std::to_string(2 * p.n()) +
                           ", got " + std::to_string(z.size()));
}

inline Eigen::VectorXd split_difference(const Eigen::VectorXd& z) {
  const Eigen::Index n = z.size() / 2;
  return z.head(n) - z.tail(n);
}

/// Nonnegative shifted objective G(z) + 1/2 ||y||^2 given the residual
/// r = Phi x - y.
inline double shifted_objective(const Eigen::VectorXd& r, const Eigen::VectorXd& z,
                                const Eigen::VectorXd& w_z, double rho) {
  return 0.5 * r.squaredNorm() + rho * (z - z.cwiseProduct(w_z)).sum();
}

/// Gradient from a precomputed Phi^T (Phi x - y).
inline Eigen::VectorXd bcqp_gradient_from(const Eigen::VectorXd& grad_x,
                                          const Eigen::VectorXd& w_z, double rho) {
  const Eigen::Index n = grad_x.size();
  Eigen::VectorXd g(2 * n);
  g.head(n) = grad_x;
  g.tail(n) = -grad_x;
  g.array() += rho * (1.0 - w_z.array());
  return g;
}

}  // namespace detail

/// G(z) = 1/2 z^T B z + c^T z.
inline double bcqp_objective(const Eigen::VectorXd& z, const SparseProblem& p,
                             const Eigen::VectorXd& w_z) {
  detail::require_split_length(z, p, "bcqp_objective");
  detail::require_split_length(w_z, p, "bcqp_objective (w_z)");
  const Eigen::VectorXd r = p.phi() * detail::split_difference(z) - p.y();
  return detail::shifted_objective(r, z, w_z, p.rho()) - 0.5 * p.y().squaredNorm();
}

/// grad G(z) = [H(u - v); -H(u - v)] + [-Phi^T y; Phi^T y] - rho w_z + rho 1.
inline Eigen::VectorXd bcqp_gradient(const Eigen::VectorXd& z, const SparseProblem& p,
                                     const Eigen::VectorXd& w_z) {
  detail::require_split_length(z, p, "bcqp_gradient");
  detail::require_split_length(w_z, p, "bcqp_gradient (w_z)");
  const Eigen::VectorXd r = p.phi() * detail::split_difference(z) - p.y();
  return detail::bcqp_gradient_from(p.phi().transpose() * r, w_z, p.rho());
}

/// Inner iterations between exact recomputations of the residual.
inline constexpr int kResidualRefresh = 32;

/// Gradient projection with Barzilai-Borwein steps:
///
///   z_half = Proj(z - alpha grad G(z)),   z+ = z + beta (z_half - z).
///
/// alpha is the BB ratio |dz|^2 / (dz^T B dz) of the previous accepted step,
/// clamped to [alpha_min, alpha_max]; the first step uses 1 / ||B||. G is
/// quadratic along d = z_half - z, so beta is its exact minimizer clipped to
/// (0, 1]. Every iterate is >= 0 and G is non-increasing over accepted steps.
///
/// A candidate step whose relative decrease of G + 1/2||y||^2 is at most
/// inner_tol is rejected and ends the loop. The loop also ends when the
/// projected step vanishes or after inner_max accepted steps.
inline BcqpResult solve_bcqp_gp(const SparseProblem& p, const Eigen::VectorXd& w_z,
                                const Eigen::VectorXd& z0, const SolverOptions& opts,
                                const BcqpObserver& observer = {}) {
  opts.validate();
  detail::require_split_length(w_z, p, "solve_bcqp_gp (w_z)");
  detail::require_split_length(z0, p, "solve_bcqp_gp (z0)");
  if ((z0.array() < 0.0).any()) throw InvalidInput("solve_bcqp_gp: z0 must be >= 0");

  const Eigen::MatrixXd& phi = p.phi();
  const Eigen::Index n = p.n();
  const double rho = p.rho();
  const double floor = std::numeric_limits<double>::epsilon() * 0.5 * p.y().squaredNorm();

  BcqpResult res{z0, 0, false};
  Eigen::VectorXd& z = res.z;
  Eigen::VectorXd r = phi * detail::split_difference(z) - p.y();
  double value = detail::shifted_objective(r, z, w_z, rho);
  detail::require_finite(value, "solve_bcqp_gp", 0);

  double alpha = std::clamp(1.0 / (2.0 * std::max(p.gram_norm(), 1e-300)), opts.alpha_min,
                            opts.alpha_max);

  for (int it = 1; it <= opts.inner_max; ++it) {
    const Eigen::VectorXd grad =
        detail::bcqp_gradient_from(phi.transpose() * r, w_z, rho);
    const Eigen::VectorXd d = (z - alpha * grad).cwiseMax(0.0) - z;
    const double slope = grad.dot(d);
    if (!(slope < 0.0)) {  // stationary: projected step is zero or not a descent direction
      res.converged = true;
      break;
    }
    const Eigen::VectorXd e = phi * (d.head(n) - d.tail(n));
    const double curvature = e.squaredNorm();  // d^T B d
    double beta = 1.0;
    if (curvature > 0.0) beta = std::min(1.0, -slope / curvature);

    Eigen::VectorXd z_next = z + beta * d;
    // The residual moves by beta * e; recompute it now and then to bound drift.
    Eigen::VectorXd r_next = (it % kResidualRefresh == 0)
                                 ? Eigen::VectorXd(phi * detail::split_difference(z_next) - p.y())
                                 : Eigen::VectorXd(r + beta * e);
    const double next_value = detail::shifted_objective(r_next, z_next, w_z, rho);
    detail::require_finite(next_value, "solve_bcqp_gp", static_cast<std::size_t>(it));
    // A step that does not decrease G enough is not taken, so re-solving an
    // already converged subproblem returns z0 unchanged.
    if (detail::small_decrease(value, next_value, opts.inner_tol, floor)) {
      res.converged = true;
      break;
    }

    z = std::move(z_next);
    r = std::move(r_next);
    value = next_value;
    ++res.iterations;
    if (observer)
      observer(BcqpStep{res.iterations, alpha, beta, value - 0.5 * p.y().squaredNorm()}, z);

    // BB ratio of the accepted step beta * d; beta cancels.
    const double dd = d.squaredNorm();
    alpha = curvature > 0.0 ? dd / curvature : opts.alpha_max;
    alpha = std::clamp(alpha, opts.alpha_min, opts.alpha_max);
  }
  return res;
}

}  // namespace dcgpsr
