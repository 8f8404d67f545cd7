#pragma once

// Massive-MIMO uniform-linear-array channel in the spatial and virtual
// angular domains, plus the real concatenation consumed by the solvers.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcgpsr/errors.hpp"
#include "dcgpsr/random.hpp"

namespace dcgpsr {

using Complex = std::complex<double>;

/// One propagation path: complex gain and spatial direction
/// phi = (d / lambda) sin(theta), with half-wavelength spacing.
struct PathSpec {
  Complex gain{1.0, 0.0};
  double spatial_direction = 0.0;  // in [-0.5, 0.5]
};

/// One channel realization. x_real = [Re(h_angular); Im(h_angular)].
struct ChannelSample {
  Eigen::VectorXcd h_spatial;
  Eigen::VectorXcd h_angular;
  Eigen::VectorXd x_real;
  int sparsity = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline void require_antennas(Eigen::Index n) {
  if (n < 1) throw InvalidDimension("antenna count must be >= 1, got " + std::to_string(n));
}

inline void require_direction(double phi) {
  if (!(phi >= -0.5 && phi <= 0.5))
    throw InvalidInput("spatial direction must lie in [-0.5, 0.5], got " + std::to_string(phi));
}

}  // namespace detail

/// Array steering vector: element i is exp(-j 2 pi phi i) / sqrt(n).
inline Eigen::VectorXcd steering_vector(double phi, Eigen::Index n) {
  detail::require_antennas(n);
  detail::require_direction(phi);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::VectorXcd a(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i) = std::polar(scale, -2.0 * std::numbers::pi * phi * static_cast<double>(i));
  }
  return a;
}

/// Spatial-domain channel sqrt(n / Np) * sum_l gain_l * a(phi_l).
inline Eigen::VectorXcd spatial_channel(std::span<const PathSpec> paths, Eigen::Index n) {
  detail::require_antennas(n);
  if (paths.empty()) throw InvalidInput("spatial_channel: path list is empty");
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(n);
  for (const auto& p : paths) h += p.gain * steering_vector(p.spatial_direction, n);
  return h * std::sqrt(static_cast<double>(n) / static_cast<double>(paths.size()));
}

/// Unitary angular transform U = [a(phi_1), ..., a(phi_n)]^H on the grid
/// phi_i = (i - (n + 1) / 2) / n, i = 1..n.
inline Eigen::MatrixXcd dft_matrix(Eigen::Index n) {
  detail::require_antennas(n);
  const double dn = static_cast<double>(n);
  Eigen::MatrixXcd u(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phi = (static_cast<double>(i + 1) - (dn + 1.0) / 2.0) / dn;
    u.row(i) = steering_vector(phi, n).adjoint();
  }
  return u;
}

inline Eigen::VectorXcd to_angular(const Eigen::VectorXcd& h_spatial, const Eigen::MatrixXcd& u) {
  if (u.rows() != u.cols() || u.cols() != h_spatial.size())
    throw InvalidDimension("to_angular: U is " + std::to_string(u.rows()) + "x" +
                           std::to_string(u.cols()) + ", h has length " +
                           std::to_string(h_spatial.size()));
  return u * h_spatial;
}

/// Inverse of to_angular: U^H h_angular.
inline Eigen::VectorXcd to_spatial(const Eigen::VectorXcd& h_angular, const Eigen::MatrixXcd& u) {
  if (u.rows() != u.cols() || u.rows() != h_angular.size())
    throw InvalidDimension("to_spatial: U is " + std::to_string(u.rows()) + "x" +
                           std::to_string(u.cols()) + ", h has length " +
                           std::to_string(h_angular.size()));
  return u.adjoint() * h_angular;
}

/// [Re(h); Im(h)].
inline Eigen::VectorXd concat_real(const Eigen::VectorXcd& h) {
  const Eigen::Index n = h.size();
  Eigen::VectorXd x(2 * n);
  x.head(n) = h.real();
  x.tail(n) = h.imag();
  return x;
}

/// Re-pairs the halves produced by concat_real.
inline Eigen::VectorXcd split_real(const Eigen::VectorXd& x) {
  if (x.size() % 2 != 0)
    throw InvalidDimension("split_real: length must be even, got " + std::to_string(x.size()));
  const Eigen::Index n = x.size() / 2;
  Eigen::VectorXcd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i) = Complex(x(i), x(n + i));
  return h;
}

/// Draws a channel whose angular representation has exactly `sparsity`
/// nonzero entries at distinct uniform positions with CN(0, 1) values. Real
/// and imaginary parts are redrawn if exactly zero, so x_real always has
/// 2 * sparsity nonzeros.
inline ChannelSample sample_sparse_channel(Eigen::Index n, int sparsity, Rng& rng) {
  detail::require_antennas(n);
  if (sparsity < 1 || sparsity > n)
    throw InvalidInput("sparsity must lie in [1, " + std::to_string(n) + "], got " +
                       std::to_string(sparsity));

  // Partial Fisher-Yates: the first `sparsity` slots become the support.
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int j = 0; j < sparsity; ++j) {
    const auto pick = static_cast<std::size_t>(j) +
                      rng.uniform_index(static_cast<std::uint64_t>(n - j));
    std::swap(perm[static_cast<std::size_t>(j)], perm[pick]);
  }

  const double half = std::numbers::sqrt2 / 2.0;
  auto nonzero_draw = [&] {
    double v = 0.0;
    while (v == 0.0) v = rng.normal() * half;
    return v;
  };

  ChannelSample s;
  s.h_angular = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < sparsity; ++j) {
    const double re = nonzero_draw();
    const double im = nonzero_draw();
    s.h_angular(perm[static_cast<std::size_t>(j)]) = Complex(re, im);
  }
  s.h_spatial = to_spatial(s.h_angular, dft_matrix(n));
  s.x_real = concat_real(s.h_angular);
  s.sparsity = sparsity;
  s.seed = rng.seed();
  return s;
}

}  // namespace dcgpsr
