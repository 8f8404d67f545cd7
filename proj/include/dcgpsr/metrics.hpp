#pragma once

#include <span>
#include <utility>

#include <Eigen/Dense>

#include "dcgpsr/errors.hpp"

namespace dcgpsr {

struct SampleError {
  int sample_index = 0;
  double nse = 0.0;
};

/// ||x_true - x_hat||^2 / ||x_true||^2.
inline double normalized_sq_error(const Eigen::VectorXd& x_true, const Eigen::VectorXd& x_hat) {
  detail::require_same_size(x_true.size(), x_hat.size(),
                            "normalized_sq_error: x_true and x_hat lengths differ");
  const double energy = x_true.squaredNorm();
  if (!(energy > 0.0)) throw InvalidInput("normalized_sq_error: ground truth is zero");
  return (x_true - x_hat).squaredNorm() / energy;
}

using VectorPair = std::pair<Eigen::VectorXd, Eigen::VectorXd>;

/// Mean of normalized_sq_error over (x_true, x_hat) pairs.
inline double nmse(std::span<const VectorPair> pairs) {
  if (pairs.empty()) throw InvalidInput("nmse: no samples");
  double sum = 0.0;
  for (const auto& [truth, est] : pairs) sum += normalized_sq_error(truth, est);
  return sum / static_cast<double>(pairs.size());
}

/// Mean of already-computed per-sample errors.
inline double nmse(std::span<const SampleError> errors) {
  if (errors.empty()) throw InvalidInput("nmse: no samples");
  double sum = 0.0;
  for (const auto& e : errors) sum += e.nse;
  return sum / static_cast<double>(errors.size());
}

}  // namespace dcgpsr
