#pragma once

// Primitive operators shared by every solver: the top-(K,1) norm and its
// subgradient, positive/negative splitting, projection onto the nonnegative
// orthant and soft thresholding.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcgpsr/errors.hpp"

namespace dcgpsr {

using VecRef = Eigen::Ref<const Eigen::VectorXd>;

/// Sign pattern selecting the K largest magnitudes. Entries are in
/// {-1, 0, +1} with exactly K nonzeros.
struct SubgradientVector {
  Eigen::VectorXd w;
  int k = 0;
};

/// x = u - v with u, v >= 0.
struct SplitVector {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
};

namespace detail {

inline void require_k(int k, Eigen::Index n) {
  if (k < 1 || k > n)
    throw InvalidInput("sparsity bound k must lie in [1, " + std::to_string(n) + "], got " +
                       std::to_string(k));
}

/// Indices of the k largest |x_i|; ties go to the lower index. Average O(N).
inline std::vector<Eigen::Index> largest_k(const VecRef& x, int k) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto before = [&x](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(x(a)), mb = std::abs(x(b));
    return ma > mb || (ma == mb && a < b);
  };
  if (static_cast<std::size_t>(k) < idx.size())
    std::nth_element(idx.begin(), idx.begin() + k, idx.end(), before);
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace detail

/// Sum of the k largest absolute entries.
inline double top_k1_norm(const VecRef& x, int k) {
  detail::require_k(k, x.size());
  double sum = 0.0;
  for (const auto i : detail::largest_k(x, k)) sum += std::abs(x(i));
  return sum;
}

/// ||x||_1 - ||x||_{k,1}; zero exactly when x has at most k nonzeros.
inline double sparsity_gap(const VecRef& x, int k) {
  detail::require_k(k, x.size());
  std::vector<double> mags(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(x(i));
  // Sum the tail directly rather than differencing two large sums, so the
  // result is exactly 0 whenever the tail is all zeros.
  std::nth_element(mags.begin(), mags.begin() + k, mags.end(), std::greater<>{});
  return std::accumulate(mags.begin() + k, mags.end(), 0.0);
}

/// A subgradient of ||.||_{k,1} at x: sign(x_i) on the k largest magnitudes
/// (lowest index wins ties), zero elsewhere. Selected zero entries get +1 so
/// that sum |w_i| = k always holds.
inline SubgradientVector top_k1_subgradient(const VecRef& x, int k) {
  detail::require_k(k, x.size());
  SubgradientVector s{Eigen::VectorXd::Zero(x.size()), k};
  for (const auto i : detail::largest_k(x, k)) s.w(i) = x(i) < 0.0 ? -1.0 : 1.0;
  return s;
}

inline SplitVector split_pos_neg(const VecRef& x) {
  return {x.cwiseMax(0.0), (-x).cwiseMax(0.0)};
}

/// u - v. Accepts non-complementary pairs.
inline Eigen::VectorXd merge_split(const SplitVector& s) {
  detail::require_same_size(s.u.size(), s.v.size(), "merge_split: u and v lengths differ");
  return s.u - s.v;
}

/// Orthogonal projection onto the nonnegative orthant.
inline Eigen::VectorXd project_nonneg(const VecRef& z) { return z.cwiseMax(0.0); }

inline double soft_threshold(double a, double lam) {
  if (!(lam >= 0.0)) throw InvalidInput("soft_threshold: threshold must be >= 0");
  const double mag = std::abs(a) - lam;
  if (mag <= 0.0) return 0.0;
  return a < 0.0 ? -mag : mag;
}

/// Elementwise soft_threshold.
inline Eigen::VectorXd soft_threshold(const VecRef& a, double lam) {
  if (!(lam >= 0.0)) throw InvalidInput("soft_threshold: threshold must be >= 0");
  Eigen::VectorXd out(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out(i) = soft_threshold(a(i), lam);
  return out;
}

}  // namespace dcgpsr
