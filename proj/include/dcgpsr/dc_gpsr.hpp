#pragma once

// DC programming with a gradient-projection inner solver, and the plain
// l1 gradient-projection baseline built from the same machinery.

#include <optional>

#include <Eigen/Dense>

#include "dcgpsr/bcqp.hpp"
#include "dcgpsr/problem.hpp"
#include "dcgpsr/sparsity.hpp"

namespace dcgpsr {

namespace detail {

inline Eigen::VectorXd stack_split(const SplitVector& s) {
  Eigen::VectorXd z(s.u.size() + s.v.size());
  z << s.u, s.v;
  return z;
}

inline void check_start(const Eigen::VectorXd& x0, const SparseProblem& p,
                        const std::optional<Eigen::VectorXd>& truth, const char* what) {
  require_signal_length(x0, p, what);
  if (truth) require_signal_length(*truth, p, what);
}

}  // namespace detail

/// Splits the subgradient of ||x||_{K,1} into w_z = [(w_x)+; (-w_x)+].
inline Eigen::VectorXd split_subgradient(const Eigen::VectorXd& x, int k) {
  return detail::stack_split(split_pos_neg(top_k1_subgradient(x, k).w));
}

/// Minimizes F(x) = 1/2||y - Phi x||^2 + rho (||x||_1 - ||x||_{K,1}).
///
/// Each outer step linearizes the concave part at x^{t-1} = u - v, then
/// solves the resulting BCQP warm-started from z^{t-1}. The inner solution
/// is re-split into complementary parts (same x, lower G). Terminates when
/// ||z^t - z^{t-1}||_2 <= outer_tol or after outer_max steps.
inline ReconResult dc_gpsr(const SparseProblem& p, const Eigen::VectorXd& x0,
                           const SolverOptions& opts,
                           const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt) {
  opts.validate();
  detail::check_start(x0, p, ground_truth, "dc_gpsr");

  ReconResult res;
  Eigen::VectorXd z = detail::stack_split(split_pos_neg(x0));
  Eigen::VectorXd x = x0;
  detail::record(res.trace, x, p, ground_truth, 0);

  for (int t = 1; t <= opts.outer_max; ++t) {
    const Eigen::VectorXd w_z = split_subgradient(x, p.k());
    const BcqpResult inner = solve_bcqp_gp(p, w_z, z, opts);
    x = detail::split_difference(inner.z);
    Eigen::VectorXd z_next = detail::stack_split(split_pos_neg(x));
    const double step = (z_next - z).norm();
    z = std::move(z_next);
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

inline ReconResult dc_gpsr(const SparseProblem& p, const SolverOptions& opts = {},
                           const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt) {
  return dc_gpsr(p, Eigen::VectorXd::Zero(p.n()), opts, ground_truth);
}

/// Conventional GPSR for 1/2||y - Phi x||^2 + rho ||x||_1: the BCQP solver
/// with w_z = 0, run once. The trace has one row per gradient-projection
/// step.
inline ReconResult gpsr_baseline(const SparseProblem& p, const Eigen::VectorXd& x0,
                                 const SolverOptions& opts,
                                 const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt) {
  opts.validate();
  detail::check_start(x0, p, ground_truth, "gpsr_baseline");

  ReconResult res;
  detail::record(res.trace, x0, p, ground_truth, 0);
  const Eigen::VectorXd w_z = Eigen::VectorXd::Zero(2 * p.n());
  const BcqpResult inner = solve_bcqp_gp(
      p, w_z, detail::stack_split(split_pos_neg(x0)), opts,
      [&](const BcqpStep&, const Eigen::VectorXd& z) {
        detail::record(res.trace, detail::split_difference(z), p, ground_truth, 1);
      });
  res.x_hat = detail::split_difference(inner.z);
  res.converged = inner.converged;
  res.outer_iters = 1;
  return res;
}

inline ReconResult gpsr_baseline(const SparseProblem& p, const SolverOptions& opts = {},
                                 const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt) {
  return gpsr_baseline(p, Eigen::VectorXd::Zero(p.n()), opts, ground_truth);
}

}  // namespace dcgpsr
