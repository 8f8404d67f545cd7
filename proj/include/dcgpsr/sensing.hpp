#pragma once

// Gaussian measurement matrices, compressed measurements and SNR-calibrated
// additive noise.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "dcgpsr/errors.hpp"
#include "dcgpsr/random.hpp"

namespace dcgpsr {

struct MeasurementMatrix {
  Eigen::MatrixXd phi;
  std::uint64_t seed = 0;

  Eigen::Index m() const noexcept { return phi.rows(); }
  Eigen::Index n() const noexcept { return phi.cols(); }
};

/// Noise-corrupted measurements. sigma == 0 exactly when noiseless.
struct NoisySystem {
  Eigen::VectorXd y;
  double sigma = 0.0;
  std::optional<double> snr_db;
};

/// M x N matrix with i.i.d. N(0, 1) entries, drawn in row-major order.
/// Entries are used raw; no column normalization.
inline MeasurementMatrix gaussian_matrix(Eigen::Index m, Eigen::Index n, Rng& rng) {
  if (m < 1 || n < 1)
    throw InvalidDimension("gaussian_matrix: dimensions must be positive, got " +
                           std::to_string(m) + "x" + std::to_string(n));
  MeasurementMatrix out;
  out.phi.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out.phi(i, j) = rng.normal();
  out.seed = rng.seed();
  return out;
}

inline Eigen::VectorXd measure(const MeasurementMatrix& phi, const Eigen::VectorXd& x) {
  if (x.size() != phi.n())
    throw InvalidDimension("measure: matrix has " + std::to_string(phi.n()) +
                           " columns, x has length " + std::to_string(x.size()));
  return phi.phi * x;
}

/// Noise standard deviation giving SNR = ||x||^2 / (m sigma^2) = 10^(snr_db/10).
inline double snr_to_sigma(const Eigen::VectorXd& x, Eigen::Index m, double snr_db) {
  if (m < 1) throw InvalidInput("snr_to_sigma: measurement count must be >= 1");
  const double energy = x.squaredNorm();
  if (!(energy > 0.0)) throw InvalidInput("snr_to_sigma: signal has zero energy");
  const double ratio = std::pow(10.0, snr_db / 10.0);
  return std::sqrt(energy / (static_cast<double>(m) * ratio));
}

/// y + n with n_i ~ N(0, sigma^2). Draws nothing when sigma == 0.
inline NoisySystem add_noise(const Eigen::VectorXd& y, double sigma, Rng& rng,
                             std::optional<double> snr_db = std::nullopt) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidInput("add_noise: sigma must be finite and >= 0, got " + std::to_string(sigma));
  NoisySystem out{y, sigma, snr_db};
  if (sigma > 0.0)
    for (Eigen::Index i = 0; i < out.y.size(); ++i) out.y(i) += sigma * rng.normal();
  return out;
}

}  // namespace dcgpsr
