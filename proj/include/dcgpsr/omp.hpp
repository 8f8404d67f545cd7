#pragma once

// Orthogonal matching pursuit and an exhaustive l0 oracle for tiny problems.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcgpsr/errors.hpp"
#include "dcgpsr/problem.hpp"
#include "dcgpsr/sensing.hpp"

namespace dcgpsr {

namespace detail {

inline Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& phi,
                                      const std::vector<Eigen::Index>& support) {
  Eigen::MatrixXd sub(phi.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j)
    sub.col(static_cast<Eigen::Index>(j)) = phi.col(support[j]);
  return sub;
}

inline Eigen::VectorXd scatter(const Eigen::VectorXd& coef,
                               const std::vector<Eigen::Index>& support, Eigen::Index n) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (std::size_t j = 0; j < support.size(); ++j) x(support[j]) = coef(static_cast<Eigen::Index>(j));
  return x;
}

/// Greedy selection with least-squares refits. on_round sees each
/// intermediate estimate.
inline Eigen::VectorXd omp_core(const Eigen::VectorXd& y, const Eigen::MatrixXd& phi, int k,
                                const std::function<void(const Eigen::VectorXd&)>& on_round,
                                int& rounds) {
  if (y.size() != phi.rows())
    throw InvalidDimension("omp: y has length " + std::to_string(y.size()) + " but Phi has " +
                           std::to_string(phi.rows()) + " rows");
  if (k < 1 || k > std::min(phi.rows(), phi.cols()))
    throw InvalidInput("omp: k must lie in [1, min(M, N)], got " + std::to_string(k));

  const Eigen::Index n = phi.cols();
  const Eigen::VectorXd norms = phi.colwise().norm().transpose();
  const double y_norm = y.norm();
  std::vector<Eigen::Index> support;
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd residual = y;
  rounds = 0;

  for (int round = 1; round <= k; ++round) {
    if (residual.norm() <= 1e-13 * y_norm || y_norm == 0.0) break;
    const Eigen::VectorXd corr = phi.transpose() * residual;
    Eigen::Index best = -1;
    double best_score = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (chosen[static_cast<std::size_t>(j)] || norms(j) == 0.0) continue;
      const double score = std::abs(corr(j)) / norms(j);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    if (best < 0) break;  // residual orthogonal to every remaining column
    support.push_back(best);
    chosen[static_cast<std::size_t>(best)] = true;

    const Eigen::MatrixXd sub = gather_columns(phi, support);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    if (qr.rank() < sub.cols())
      throw NumericalFailure("omp: selected columns are rank deficient",
                             static_cast<std::size_t>(round));
    const Eigen::VectorXd coef = qr.solve(y);
    x = scatter(coef, support, n);
    residual = y - sub * coef;
    rounds = round;
    if (on_round) on_round(x);
  }
  return x;
}

}  // namespace detail

/// OMP with k rounds. Trace objectives use the problem's rho.
inline ReconResult omp(const SparseProblem& p,
                       const std::optional<Eigen::VectorXd>& ground_truth = std::nullopt) {
  if (ground_truth) require_signal_length(*ground_truth, p, "omp");
  ReconResult res;
  detail::record(res.trace, Eigen::VectorXd::Zero(p.n()), p, ground_truth, 0);
  res.x_hat = detail::omp_core(
      p.y(), p.phi(), p.k(),
      [&](const Eigen::VectorXd& x) { detail::record(res.trace, x, p, ground_truth, 1); },
      res.outer_iters);
  res.converged = true;
  return res;
}

/// OMP without a regularized problem; the trace is left empty.
inline ReconResult omp(const Eigen::VectorXd& y, const MeasurementMatrix& phi, int k) {
  ReconResult res;
  res.x_hat = detail::omp_core(y, phi.phi, k, {}, res.outer_iters);
  res.converged = true;
  return res;
}

/// Binomial coefficient, saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    // c * num / i is exact at every step; guard the multiplication.
    if (c > UINT64_MAX / num) return UINT64_MAX;
    c = c * num / i;
  }
  return c;
}

inline constexpr std::uint64_t kMaxOracleSupports = 1'000'000;

/// Exhaustive l0 least squares: minimizes ||y - Phi x||^2 over every support
/// of size <= k. Among fits equal to within 1e-12 ||y||^2 the smaller support
/// (then the lexicographically first) wins.
inline Eigen::VectorXd brute_force_l0(const Eigen::VectorXd& y, const MeasurementMatrix& phi,
                                      int k) {
  const Eigen::Index n = phi.n();
  if (y.size() != phi.m())
    throw InvalidDimension("brute_force_l0: y has length " + std::to_string(y.size()) +
                           " but Phi has " + std::to_string(phi.m()) + " rows");
  if (k < 0 || k > n) throw InvalidInput("brute_force_l0: k out of range");
  if (binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k)) > kMaxOracleSupports)
    throw InstanceTooLarge("brute_force_l0: C(" + std::to_string(n) + ", " + std::to_string(k) +
                           ") exceeds " + std::to_string(kMaxOracleSupports) + " supports");

  const double slack = 1e-12 * y.squaredNorm();
  Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
  double best_res = y.squaredNorm();

  for (int size = 1; size <= k; ++size) {
    std::vector<Eigen::Index> support(static_cast<std::size_t>(size));
    for (int j = 0; j < size; ++j) support[static_cast<std::size_t>(j)] = j;
    while (true) {
      const Eigen::MatrixXd sub = detail::gather_columns(phi.phi, support);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
      if (qr.rank() == sub.cols()) {
        const Eigen::VectorXd coef = qr.solve(y);
        const double res = (y - sub * coef).squaredNorm();
        if (res < best_res - slack) {
          best_res = res;
          best = detail::scatter(coef, support, n);
        }
      }
      // Next combination in lexicographic order.
      int i = size - 1;
      while (i >= 0 && support[static_cast<std::size_t>(i)] == n - size + i) --i;
      if (i < 0) break;
      ++support[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j)
        support[static_cast<std::size_t>(j)] = support[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return best;
}

}  // namespace dcgpsr
