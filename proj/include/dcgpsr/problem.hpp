#pragma once

// Problem instance, solver options, traces and the objectives shared by
// every solver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcgpsr/errors.hpp"
#include "dcgpsr/metrics.hpp"
#include "dcgpsr/sensing.hpp"
#include "dcgpsr/sparsity.hpp"

namespace dcgpsr {

/// Largest eigenvalue of Phi^T Phi by power iteration on the smaller Gram
/// matrix. Rayleigh quotients approach the eigenvalue from below.
inline double gram_spectral_norm(const Eigen::MatrixXd& phi, int max_iters = 2000,
                                 double rel_tol = 1e-13) {
  const bool rows_side = phi.rows() <= phi.cols();
  const Eigen::Index dim = rows_side ? phi.rows() : phi.cols();
  if (dim == 0) return 0.0;
  // Deterministic, non-constant start so that no structured eigenvector is
  // missed by symmetry.
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = rows_side ? Eigen::VectorXd(phi * (phi.transpose() * v))
                                  : Eigen::VectorXd(phi.transpose() * (phi * v));
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (std::abs(next - lambda) <= rel_tol * next) return next;
    lambda = next;
  }
  return lambda;
}

/// y ~ Phi x with at most k nonzeros in x, regularization weight rho > 0.
/// Phi is held by shared pointer so that many problems can reference one
/// matrix read-only.
class SparseProblem {
 public:
  SparseProblem(std::shared_ptr<const MeasurementMatrix> phi, Eigen::VectorXd y, int k,
                double rho, std::optional<double> gram_norm = std::nullopt)
      : phi_(std::move(phi)), y_(std::move(y)), k_(k), rho_(rho) {
    if (!phi_) throw InvalidInput("SparseProblem: null measurement matrix");
    if (phi_->m() < 1 || phi_->n() < 1) throw InvalidDimension("SparseProblem: empty matrix");
    if (y_.size() != phi_->m())
      throw InvalidDimension("SparseProblem: y has length " + std::to_string(y_.size()) +
                             " but Phi has " + std::to_string(phi_->m()) + " rows");
    detail::require_k(k_, phi_->n());
    if (!(rho_ > 0.0) || !std::isfinite(rho_))
      throw InvalidInput("SparseProblem: rho must be finite and > 0");
    phi_t_y_ = phi_->phi.transpose() * y_;
    gram_norm_ = gram_norm ? *gram_norm : gram_spectral_norm(phi_->phi);
  }

  SparseProblem(MeasurementMatrix phi, Eigen::VectorXd y, int k, double rho)
      : SparseProblem(std::make_shared<const MeasurementMatrix>(std::move(phi)), std::move(y), k,
                      rho) {}

  const Eigen::MatrixXd& phi() const noexcept { return phi_->phi; }
  const std::shared_ptr<const MeasurementMatrix>& matrix() const noexcept { return phi_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }
  const Eigen::VectorXd& phi_t_y() const noexcept { return phi_t_y_; }
  int k() const noexcept { return k_; }
  double rho() const noexcept { return rho_; }
  Eigen::Index m() const noexcept { return phi_->m(); }
  Eigen::Index n() const noexcept { return phi_->n(); }
  /// Power-method estimate of ||Phi^T Phi||_2.
  double gram_norm() const noexcept { return gram_norm_; }

 private:
  std::shared_ptr<const MeasurementMatrix> phi_;
  Eigen::VectorXd y_;
  Eigen::VectorXd phi_t_y_;
  int k_;
  double rho_;
  double gram_norm_ = 0.0;
};

/// Default rho as a fraction of ||Phi^T y||_inf.
inline constexpr double kDefaultRhoFraction = 1e-3;

/// rho = fraction * ||Phi^T y||_inf.
inline double default_rho(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                          double fraction = kDefaultRhoFraction) {
  detail::require_same_size(phi.rows(), y.size(), "default_rho: Phi rows vs y length");
  const double r = fraction * (phi.transpose() * y).cwiseAbs().maxCoeff();
  if (!(r > 0.0)) throw InvalidInput("default_rho: Phi^T y is zero, rho would be 0");
  return r;
}

/// Default noise multiplier for auto_rho.
inline constexpr double kDefaultRhoNoiseFactor = 0.5;

/// max(fraction ||Phi^T y||_inf, noise_factor sigma c sqrt(2 ln N)) with c the
/// mean column norm of Phi. The second term is the level of |phi_j^T n| for
/// pure noise n; it vanishes for noiseless data.
inline double auto_rho(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, double sigma,
                       double fraction = kDefaultRhoFraction,
                       double noise_factor = kDefaultRhoNoiseFactor) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("auto_rho: sigma must be >= 0");
  if (!(noise_factor >= 0.0)) throw InvalidInput("auto_rho: noise_factor must be >= 0");
  const double base = default_rho(phi, y, fraction);
  if (sigma == 0.0 || noise_factor == 0.0) return base;
  const double col = phi.colwise().norm().mean();
  const double n = static_cast<double>(phi.cols());
  return std::max(base, noise_factor * sigma * col * std::sqrt(2.0 * std::log(std::max(n, 2.0))));
}

struct SolverOptions {
  double outer_tol = 1e-14;
  int outer_max = 50;
  /// Relative decrease of the inner objective below which an inner loop stops.
  double inner_tol = 1e-10;
  int inner_max = 20000;
  double alpha_min = 1e-30;
  double alpha_max = 1e30;
  double lipschitz_margin = 1.01;

  void validate() const {
    if (!(outer_tol > 0.0)) throw InvalidInput("outer_tol must be > 0");
    if (!(inner_tol > 0.0)) throw InvalidInput("inner_tol must be > 0");
    if (outer_max < 1) throw InvalidInput("outer_max must be >= 1");
    if (inner_max < 1) throw InvalidInput("inner_max must be >= 1");
    if (!(alpha_min > 0.0 && alpha_min < alpha_max))
      throw InvalidInput("require 0 < alpha_min < alpha_max");
    if (!(lipschitz_margin >= 1.0)) throw InvalidInput("lipschitz_margin must be >= 1");
  }
};

/// Per-iteration history. Row t describes iterate t (row 0 is the start
/// point). errors is empty when no ground truth was supplied.
struct SolverTrace {
  std::vector<double> outer_objectives;
  std::vector<double> l1_objectives;
  std::vector<double> errors;
  std::vector<std::size_t> inner_counts;

  std::size_t size() const noexcept { return outer_objectives.size(); }

  std::size_t inner_total() const noexcept {
    std::size_t total = 0;
    for (auto c : inner_counts) total += c;
    return total;
  }
};

struct ReconResult {
  Eigen::VectorXd x_hat;
  SolverTrace trace;
  bool converged = false;
  int outer_iters = 0;
};

inline void require_signal_length(const Eigen::VectorXd& x, const SparseProblem& p,
                                  const char* what) {
  if (x.size() != p.n())
    throw InvalidDimension(std::string(what) + ": x has length " + std::to_string(x.size()) +
                           " but Phi has " + std::to_string(p.n()) + " columns");
}

inline double data_misfit(const Eigen::VectorXd& x, const SparseProblem& p) {
  return 0.5 * (p.y() - p.phi() * x).squaredNorm();
}

/// F(x) = 1/2 ||y - Phi x||^2 + rho (||x||_1 - ||x||_{K,1}).
inline double objective_F(const Eigen::VectorXd& x, const SparseProblem& p) {
  require_signal_length(x, p, "objective_F");
  return data_misfit(x, p) + p.rho() * sparsity_gap(x, p.k());
}

/// 1/2 ||y - Phi x||^2 + rho ||x||_1.
inline double objective_l1(const Eigen::VectorXd& x, const SparseProblem& p) {
  require_signal_length(x, p, "objective_l1");
  return data_misfit(x, p) + p.rho() * x.lpNorm<1>();
}

namespace detail {

/// Appends one trace row for iterate x.
inline void record(SolverTrace& trace, const Eigen::VectorXd& x, const SparseProblem& p,
                   const std::optional<Eigen::VectorXd>& truth, std::size_t inner) {
  const double misfit = data_misfit(x, p);
  trace.outer_objectives.push_back(misfit + p.rho() * sparsity_gap(x, p.k()));
  trace.l1_objectives.push_back(misfit + p.rho() * x.lpNorm<1>());
  if (truth) trace.errors.push_back(normalized_sq_error(*truth, x));
  trace.inner_counts.push_back(inner);
}

/// Relative-decrease stopping test for a nonnegative objective. The
/// denominator is floored at `floor` so that iterates sitting at
/// round-off level stop instead of chasing noise.
inline bool small_decrease(double previous, double current, double tol, double floor) {
  return previous - current <= tol * std::max(previous, floor);
}

inline void require_finite(double v, const char* what, std::size_t iter) {
  if (!std::isfinite(v)) throw NumericalFailure(std::string(what) + ": non-finite value", iter);
}

}  // namespace detail
}  // namespace dcgpsr
