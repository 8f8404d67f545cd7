#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Steering-grid DFT matrix built entry by entry from the closed form
/// U(i, k) = exp(+j 2 pi phi_i k) / sqrt(n), phi_i = (i + 1 - (n + 1) / 2) / n.
inline Eigen::MatrixXcd dft(int n) {
  Eigen::MatrixXcd u(n, n);
  for (int i = 0; i < n; ++i) {
    const double phi = (i + 1 - (n + 1) / 2.0) / n;
    for (int k = 0; k < n; ++k)
      u(i, k) = std::exp(std::complex<double>(0.0, 2.0 * std::numbers::pi * phi * k)) /
                std::sqrt(static_cast<double>(n));
  }
  return u;
}

/// Sum of the k largest magnitudes by full sort.
inline double top_k(const Eigen::VectorXd& x, int k) {
  std::vector<double> a(x.data(), x.data() + x.size());
  for (auto& v : a) v = std::abs(v);
  std::sort(a.begin(), a.end(), std::greater<>());
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += a[static_cast<std::size_t>(i)];
  return s;
}

/// max <x, w> over w in {-1, 0, 1}^N with sum |w_i| = k, by enumeration.
inline double max_inner_product(const Eigen::VectorXd& x, int k) {
  const int n = static_cast<int>(x.size());
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  double best = -std::numeric_limits<double>::infinity();
  for (int code = 0; code < total; ++code) {
    int c = code, nnz = 0;
    double dot = 0.0;
    for (int i = 0; i < n; ++i) {
      const int w = c % 3 - 1;
      c /= 3;
      nnz += w != 0;
      dot += w * x(i);
    }
    if (nnz == k) best = std::max(best, dot);
  }
  return best;
}

inline double central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& z, Eigen::Index i, double h) {
  Eigen::VectorXd a = z, b = z;
  a(i) += h;
  b(i) -= h;
  return (f(a) - f(b)) / (2.0 * h);
}

/// Dense BCQP data for G(z) = 1/2 z^T B z + c^T z with z = [u; v]:
/// B = [H -H; -H H], H = Phi^T Phi, c = rho 1 - rho w_z + [-Phi^T y; Phi^T y].
struct DenseBcqp {
  Eigen::MatrixXd b;
  Eigen::VectorXd c;

  double value(const Eigen::VectorXd& z) const { return 0.5 * z.dot(b * z) + c.dot(z); }
};

inline DenseBcqp dense_bcqp(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, double rho,
                            const Eigen::VectorXd& w_z) {
  const Eigen::Index n = phi.cols();
  const Eigen::MatrixXd h = phi.transpose() * phi;
  DenseBcqp q;
  q.b.resize(2 * n, 2 * n);
  q.b << h, -h, -h, h;
  const Eigen::VectorXd aty = phi.transpose() * y;
  q.c.resize(2 * n);
  q.c << -aty, aty;
  q.c.array() += rho * (1.0 - w_z.array());
  return q;
}

/// Projected gradient with a fixed step 1 / ||B||_2 (eigenvalue from a
/// self-adjoint eigensolve) for `iters` iterations.
inline Eigen::VectorXd slow_projected_gradient(const DenseBcqp& q, long iters) {
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q.b).eigenvalues().maxCoeff();
  const double step = 1.0 / lmax;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(q.c.size());
  for (long it = 0; it < iters; ++it) z = (z - step * (q.b * z + q.c)).cwiseMax(0.0);
  return z;
}

/// Exact BCQP minimum by enumerating free sets: on each subset F solve
/// B_FF z_F = -c_F (least-norm), keep feasible points, return the lowest
/// objective. Exponential; for 2N <= 12.
inline double bcqp_min_by_enumeration(const DenseBcqp& q) {
  const int dim = static_cast<int>(q.c.size());
  double best = q.value(Eigen::VectorXd::Zero(dim));
  for (int mask = 1; mask < (1 << dim); ++mask) {
    std::vector<int> free;
    for (int i = 0; i < dim; ++i)
      if (mask & (1 << i)) free.push_back(i);
    const int f = static_cast<int>(free.size());
    Eigen::MatrixXd bff(f, f);
    Eigen::VectorXd cf(f);
    for (int a = 0; a < f; ++a) {
      cf(a) = q.c(free[a]);
      for (int b = 0; b < f; ++b) bff(a, b) = q.b(free[a], free[b]);
    }
    const Eigen::VectorXd zf = bff.completeOrthogonalDecomposition().solve(-cf);
    if ((bff * zf + cf).norm() > 1e-9 * (1.0 + cf.norm())) continue;  // inconsistent
    if ((zf.array() < 0.0).any()) continue;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(dim);
    for (int a = 0; a < f; ++a) z(free[a]) = zf(a);
    best = std::min(best, q.value(z));
  }
  return best;
}

}  // namespace oracle
