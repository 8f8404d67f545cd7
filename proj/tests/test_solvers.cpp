#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "dcgpsr/dcgpsr.hpp"
#include "dcgpsr/harness/experiment.hpp"
#include "oracles.hpp"

using namespace dcgpsr;

namespace {

std::shared_ptr<const MeasurementMatrix> shared(Eigen::MatrixXd a) {
  return std::make_shared<const MeasurementMatrix>(MeasurementMatrix{std::move(a), 0});
}

std::vector<Eigen::Index> support(const Eigen::VectorXd& x) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) != 0.0) s.push_back(i);
  return s;
}

SolverOptions tight() {
  SolverOptions o;
  o.inner_tol = 1e-15;
  o.inner_max = 200000;
  return o;
}

}  // namespace

// ---- problem and objectives ------------------------------------------------

TEST(SparseProblem, Validation) {
  auto phi = shared(Eigen::MatrixXd::Ones(3, 5));
  EXPECT_THROW(SparseProblem(phi, Eigen::VectorXd::Zero(4), 2, 0.1), InvalidDimension);
  EXPECT_THROW(SparseProblem(phi, Eigen::VectorXd::Zero(3), 0, 0.1), InvalidInput);
  EXPECT_THROW(SparseProblem(phi, Eigen::VectorXd::Zero(3), 6, 0.1), InvalidInput);
  EXPECT_THROW(SparseProblem(phi, Eigen::VectorXd::Zero(3), 2, 0.0), InvalidInput);
  EXPECT_THROW(SparseProblem(nullptr, Eigen::VectorXd::Zero(3), 2, 0.1), InvalidInput);
  const SparseProblem p(phi, Eigen::VectorXd::Ones(3), 2, 0.1);
  EXPECT_EQ(p.m(), 3);
  EXPECT_EQ(p.n(), 5);
  EXPECT_EQ(p.phi_t_y(), Eigen::VectorXd::Constant(5, 3.0));
}

TEST(GramSpectralNorm, MatchesEigensolver) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto phi = gaussian_matrix(12 + 5 * static_cast<int>(seed), 40, rng).phi;
    const double exact = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(phi * phi.transpose())
                             .eigenvalues()
                             .maxCoeff();
    EXPECT_NEAR(gram_spectral_norm(phi), exact, 1e-9 * exact);
    EXPECT_NEAR(gram_spectral_norm(phi.transpose()), exact, 1e-9 * exact);
  }
}

TEST(Rho, DefaultAndNoiseAware) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 3);
  const Eigen::Vector2d y(3.0, -4.0);
  EXPECT_DOUBLE_EQ(default_rho(a, y, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(default_rho(a, y), 4.0 * kDefaultRhoFraction);
  EXPECT_THROW(default_rho(a, Eigen::VectorXd::Zero(2)), InvalidInput);
  EXPECT_DOUBLE_EQ(auto_rho(a, y, 0.0), default_rho(a, y));
  // Column norms 1, 1, 0: mean 2/3.
  const double noise = 0.5 * 2.0 * (2.0 / 3.0) * std::sqrt(2.0 * std::log(3.0));
  EXPECT_DOUBLE_EQ(auto_rho(a, y, 2.0), std::max(default_rho(a, y), noise));
  EXPECT_THROW(auto_rho(a, y, -1.0), InvalidInput);
}

TEST(Objectives, Examples) {
  Rng rng(3);
  auto phi = std::make_shared<const MeasurementMatrix>(gaussian_matrix(6, 10, rng));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(10);
  x(2) = 1.5;
  x(7) = -0.5;
  const Eigen::VectorXd y = phi->phi * x;
  const SparseProblem p(phi, y, 2, 0.3);
  EXPECT_DOUBLE_EQ(objective_F(Eigen::VectorXd::Zero(10), p), 0.5 * y.squaredNorm());
  EXPECT_DOUBLE_EQ(objective_l1(Eigen::VectorXd::Zero(10), p), 0.5 * y.squaredNorm());
  EXPECT_EQ(objective_F(x, p), 0.5 * (y - phi->phi * x).squaredNorm());
  EXPECT_LE(objective_F(x, p), 1e-28);
  EXPECT_NEAR(objective_l1(x, p), 0.3 * x.lpNorm<1>(), 1e-14);

  Eigen::VectorXd z(10);
  for (int i = 0; i < 10; ++i) z(i) = rng.normal();
  EXPECT_GT(objective_F(z, p), 0.0);
  EXPECT_NEAR(objective_l1(z, p), objective_F(z, p) + 0.3 * top_k1_norm(z, 2),
              1e-12 * objective_l1(z, p));
  EXPECT_THROW(objective_F(Eigen::VectorXd::Zero(9), p), InvalidDimension);
  EXPECT_THROW(objective_l1(Eigen::VectorXd::Zero(11), p), InvalidDimension);
}

// ---- dc_gpsr ---------------------------------------------------------------

TEST(DcGpsr, IdentityMeasurementFixedPoint) {
  auto phi = shared(Eigen::MatrixXd::Identity(8, 8));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(8);
  y(1) = 2.0;
  y(4) = -0.7;
  y(6) = 1.2;
  const SparseProblem p(phi, y, 3, 0.5);
  const auto r = dc_gpsr(p, tight());
  EXPECT_LE((r.x_hat - y).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(r.converged);
}

TEST(DcGpsr, PaperScaleNoiselessInstance) {
  Rng rng(hash64(2024, 0, 0));
  const auto ch = sample_sparse_channel(256, 16, rng);
  auto phi = std::make_shared<const MeasurementMatrix>(gaussian_matrix(128, 512, rng));
  const Eigen::VectorXd y = phi->phi * ch.x_real;
  const SparseProblem p(phi, y, 32, default_rho(phi->phi, y));
  const auto r = dc_gpsr(p, SolverOptions{}, ch.x_real);
  EXPECT_LE(normalized_sq_error(ch.x_real, r.x_hat), 1e-20);
  EXPECT_LE(r.outer_iters, 20);
  EXPECT_TRUE(r.converged);
  // Trace bookkeeping.
  ASSERT_EQ(r.trace.size(), static_cast<std::size_t>(r.outer_iters) + 1);
  EXPECT_EQ(r.trace.errors.size(), r.trace.size());
  EXPECT_EQ(r.trace.l1_objectives.size(), r.trace.size());
  EXPECT_EQ(r.trace.inner_counts.front(), 0u);
  EXPECT_DOUBLE_EQ(r.trace.outer_objectives.front(), 0.5 * y.squaredNorm());
  EXPECT_EQ(r.trace.errors.front(), 1.0);
}

TEST(DcGpsr, MonotoneDescentAndFeasibleOutput) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_sparse_instance(30, 80, 6, seed);
    Rng rng(seed + 1000);
    Eigen::VectorXd y = inst.y;
    for (int i = 0; i < 30; ++i) y(i) += 0.05 * rng.normal();
    const SparseProblem p(inst.phi, y, 6, default_rho(inst.phi->phi, y, 0.05));
    const auto r = dc_gpsr(p, SolverOptions{}, inst.x);
    for (std::size_t t = 1; t < r.trace.size(); ++t)
      EXPECT_LE(r.trace.outer_objectives[t], r.trace.outer_objectives[t - 1] + 1e-9)
          << "seed " << seed << " t " << t;
    EXPECT_TRUE(r.x_hat.allFinite());
    EXPECT_NEAR(r.trace.outer_objectives.back(), objective_F(r.x_hat, p), 1e-12);
  }
}

TEST(DcGpsr, FullSupportRecoversLeastSquares) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    auto phi = std::make_shared<const MeasurementMatrix>(gaussian_matrix(20, 12, rng));
    Eigen::VectorXd x(12);
    for (int i = 0; i < 12; ++i) x(i) = rng.normal();
    const Eigen::VectorXd y = phi->phi * x;
    const SparseProblem p(phi, y, 12, 0.1);
    const auto r = dc_gpsr(p, tight());
    EXPECT_LE((y - phi->phi * r.x_hat).norm(), 1e-8) << "seed " << seed;
  }
}

TEST(DcGpsr, ZeroDataAndWarmStart) {
  Rng rng(1);
  auto phi = std::make_shared<const MeasurementMatrix>(gaussian_matrix(5, 9, rng));
  const SparseProblem zero(phi, Eigen::VectorXd::Zero(5), 2, 0.1);
  EXPECT_EQ(dc_gpsr(zero).x_hat, Eigen::VectorXd::Zero(9));

  const auto inst = random_sparse_instance(20, 40, 3, 8);
  const SparseProblem p(inst.phi, inst.y, 3, default_rho(inst.phi->phi, inst.y));
  const auto cold = dc_gpsr(p);
  const auto warm = dc_gpsr(p, cold.x_hat, SolverOptions{});
  EXPECT_LE(warm.outer_iters, 2);
  EXPECT_LE((warm.x_hat - cold.x_hat).norm(), 1e-10 * cold.x_hat.norm());
  EXPECT_THROW(dc_gpsr(p, Eigen::VectorXd::Zero(39), SolverOptions{}), InvalidDimension);
  EXPECT_THROW(dc_gpsr(p, SolverOptions{}, Eigen::VectorXd::Zero(3)), InvalidDimension);
}

TEST(DcGpsr, OuterMaxRespected) {
  const auto inst = random_sparse_instance(30, 80, 6, 3);
  const SparseProblem p(inst.phi, inst.y, 6, default_rho(inst.phi->phi, inst.y, 0.1));
  SolverOptions o;
  o.outer_max = 1;
  const auto r = dc_gpsr(p, o);
  EXPECT_EQ(r.outer_iters, 1);
  EXPECT_EQ(r.trace.size(), 2u);
}

TEST(DcGpsr, TinySupportsMatchBruteForce) {
  int agree = 0;
  for (int t = 0; t < 50; ++t) {
    const auto inst = random_sparse_instance(8, 12, 2, hash64(42, static_cast<std::uint64_t>(t), 0));
    const SparseProblem p(inst.phi, inst.y, 2, default_rho(inst.phi->phi, inst.y));
    agree += support(dc_gpsr(p).x_hat) == support(brute_force_l0(inst.y, *inst.phi, 2));
  }
  EXPECT_GE(agree, 45);
}

// ---- dc_proximal -----------------------------------------------------------

TEST(DcProximal, AgreesWithDcGpsr) {
  // The two linearize ||.||_{K,1} over z and over x respectively, so the
  // first subproblems differ and an occasional instance ends in a different
  // local minimum. Agreement is counted.
  SolverOptions o = tight();
  o.inner_max = 1'000'000;
  int agree = 0;
  for (int t = 0; t < 20; ++t) {
    const auto inst = random_sparse_instance(16, 32, 4, hash64(7, static_cast<std::uint64_t>(t), 0));
    const SparseProblem p(inst.phi, inst.y, 4, default_rho(inst.phi->phi, inst.y));
    const auto a = dc_gpsr(p, o);
    const auto b = dc_proximal(p, o);
    agree += (a.x_hat - b.x_hat).lpNorm<Eigen::Infinity>() <= 1e-6;
  }
  EXPECT_GE(agree, 19);
}

TEST(DcProximal, SameSubproblemSolutionGivenSameStart) {
  // Started from a K-sparse point with distinct magnitudes, one outer step of
  // each solves a subproblem with the same minimizer.
  SolverOptions o = tight();
  o.inner_max = 1'000'000;
  o.outer_max = 1;
  for (int t = 0; t < 5; ++t) {
    const auto inst = random_sparse_instance(16, 32, 4, hash64(8, static_cast<std::uint64_t>(t), 0));
    const SparseProblem p(inst.phi, inst.y, 4, default_rho(inst.phi->phi, inst.y, 0.05));
    const Eigen::VectorXd x0 = 0.9 * inst.x;
    const auto a = dc_gpsr(p, x0, o);
    const auto b = dc_proximal(p, x0, o);
    EXPECT_LE((a.x_hat - b.x_hat).lpNorm<Eigen::Infinity>(), 1e-6) << "instance " << t;
  }
}

TEST(DcProximal, FirstStepIsSoftThreshold) {
  auto phi = shared(Eigen::MatrixXd::Identity(4, 4));
  const Eigen::Vector4d y(2.0, -0.3, 0.9, -1.5);
  const SparseProblem p(phi, y, 2, 0.5);
  const Eigen::VectorXd x1 = proximal_step(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4), p, 1.0);
  EXPECT_EQ(x1, soft_threshold(y, 0.5));
  const double l = 2.0;
  const Eigen::VectorXd x2 = proximal_step(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4), p, l);
  EXPECT_LE((x2 - soft_threshold(y / l, 0.5 / l)).norm(), 1e-15);
  EXPECT_THROW(proximal_step(Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4), p, 0.0),
               InvalidInput);
}

TEST(DcProximal, InnerObjectiveNonIncreasing) {
  const auto inst = random_sparse_instance(30, 80, 6, 11);
  const SparseProblem p(inst.phi, inst.y, 6, default_rho(inst.phi->phi, inst.y, 0.05));
  int last_outer = 0;
  double prev = 0.0;
  std::size_t calls = 0;
  dc_proximal(p, Eigen::VectorXd::Zero(80), SolverOptions{}, std::nullopt,
              [&](int outer, std::size_t, double value, const Eigen::VectorXd&) {
                ++calls;
                if (outer == last_outer) {
                  EXPECT_LE(value, prev + 1e-12 * (1.0 + std::abs(prev)));
                }
                last_outer = outer;
                prev = value;
              });
  EXPECT_GT(calls, 10u);
}

TEST(DcProximal, MonotoneOuterDescent) {
  const auto inst = random_sparse_instance(30, 80, 6, 12);
  const SparseProblem p(inst.phi, inst.y, 6, default_rho(inst.phi->phi, inst.y, 0.05));
  const auto r = dc_proximal(p, SolverOptions{}, inst.x);
  for (std::size_t t = 1; t < r.trace.size(); ++t)
    EXPECT_LE(r.trace.outer_objectives[t], r.trace.outer_objectives[t - 1] + 1e-9);
}

// ---- gpsr / ista -----------------------------------------------------------

TEST(GpsrBaseline, ZeroData) {
  Rng rng(2);
  auto phi = std::make_shared<const MeasurementMatrix>(gaussian_matrix(5, 9, rng));
  const SparseProblem p(phi, Eigen::VectorXd::Zero(5), 2, 0.1);
  const auto r = gpsr_baseline(p);
  EXPECT_EQ(r.x_hat, Eigen::VectorXd::Zero(9));
  EXPECT_EQ(r.outer_iters, 1);
}

TEST(GpsrBaseline, SolvesLassoOptimality) {
  // KKT for the l1 problem: |Phi^T r|_i <= rho, with equality and matching
  // sign on the support (r = y - Phi x).
  const auto inst = random_sparse_instance(20, 50, 4, 5);
  const double rho = default_rho(inst.phi->phi, inst.y, 0.05);
  const SparseProblem p(inst.phi, inst.y, 4, rho);
  const auto r = gpsr_baseline(p, tight());
  const Eigen::VectorXd corr = inst.phi->phi.transpose() * (inst.y - inst.phi->phi * r.x_hat);
  for (int i = 0; i < 50; ++i) {
    if (r.x_hat(i) != 0.0)
      EXPECT_NEAR(corr(i), rho * (r.x_hat(i) > 0 ? 1.0 : -1.0), 1e-6 * rho);
    else
      EXPECT_LE(std::abs(corr(i)), rho * (1.0 + 1e-6));
  }
  for (std::size_t t = 1; t < r.trace.size(); ++t)
    EXPECT_LE(r.trace.l1_objectives[t], r.trace.l1_objectives[t - 1] + 1e-12);
}

TEST(Ista, FixedPoint) {
  const auto inst = random_sparse_instance(20, 50, 4, 6);
  const SparseProblem p(inst.phi, inst.y, 4, default_rho(inst.phi->phi, inst.y, 0.05));
  SolverOptions o = tight();
  const auto r = ista(p, o);
  const double l = proximal_lipschitz(p, o);
  const Eigen::VectorXd again = proximal_step(r.x_hat, Eigen::VectorXd::Zero(50), p, l);
  EXPECT_LE((again - r.x_hat).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ista, IdentityConvergesToSoftThreshold) {
  auto phi = shared(Eigen::MatrixXd::Identity(5, 5));
  Eigen::VectorXd y(5);
  y << 2.0, -0.3, 0.9, -1.5, 0.0;
  const SparseProblem p(phi, y, 2, 0.5);
  const auto r = ista(p, tight());
  EXPECT_LE((r.x_hat - soft_threshold(y, 0.5)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ista, MatchesGpsrObjective) {
  for (int t = 0; t < 20; ++t) {
    const auto inst = random_sparse_instance(15, 40, 3, hash64(99, static_cast<std::uint64_t>(t), 0));
    const SparseProblem p(inst.phi, inst.y, 3, default_rho(inst.phi->phi, inst.y, 0.05));
    SolverOptions o = tight();
    o.inner_max = 1'000'000;
    const double a = objective_l1(gpsr_baseline(p, o).x_hat, p);
    const double b = objective_l1(ista(p, o).x_hat, p);
    EXPECT_NEAR(a, b, 1e-6) << "instance " << t;
  }
}

// ---- omp and the l0 oracle --------------------------------------------------

TEST(Omp, SingleAtom) {
  Rng rng(4);
  const auto phi = gaussian_matrix(10, 20, rng);
  const Eigen::VectorXd y = 2.0 * phi.phi.col(3);
  const auto r = omp(y, phi, 1);
  EXPECT_EQ(support(r.x_hat), std::vector<Eigen::Index>{3});
  EXPECT_NEAR(r.x_hat(3), 2.0, 1e-12);
  EXPECT_LE((y - phi.phi * r.x_hat).norm(), 1e-12);
}

TEST(Omp, ZeroData) {
  Rng rng(4);
  const auto phi = gaussian_matrix(10, 20, rng);
  const auto r = omp(Eigen::VectorXd::Zero(10), phi, 3);
  EXPECT_EQ(r.x_hat, Eigen::VectorXd::Zero(20));
  EXPECT_EQ(r.outer_iters, 0);
}

TEST(Omp, OneSparseExactRecovery) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = random_sparse_instance(16, 64, 1, seed);
    const auto r = omp(inst.y, *inst.phi, 1);
    EXPECT_EQ(support(r.x_hat), support(inst.x)) << "seed " << seed;
    EXPECT_LE((r.x_hat - inst.x).norm(), 1e-12 * inst.x.norm());
  }
}

TEST(Omp, Errors) {
  Rng rng(4);
  const auto phi = gaussian_matrix(4, 6, rng);
  EXPECT_THROW(omp(Eigen::VectorXd::Zero(3), phi, 1), InvalidDimension);
  EXPECT_THROW(omp(Eigen::VectorXd::Zero(4), phi, 5), InvalidInput);
  EXPECT_THROW(omp(Eigen::VectorXd::Zero(4), phi, 0), InvalidInput);
}

TEST(Omp, RankDeficientSelectionFails) {
  // Column 1 equals column 0 up to 1e-17 in a direction the residual keeps,
  // so it is selected second and the refit is singular.
  Eigen::MatrixXd a(3, 2);
  a << 1.0, 1.0, 0.0, 1e-17, 0.0, 0.0;
  const MeasurementMatrix phi{a, 0};
  const Eigen::Vector3d y(1.0, 1.0, 1.0);
  try {
    omp(y, phi, 2);
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    EXPECT_EQ(e.iteration(), 2u);
  }
}

TEST(BruteForceL0, RecoversSparseTruth) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_sparse_instance(8, 10, 3, seed);
    const Eigen::VectorXd x = brute_force_l0(inst.y, *inst.phi, 3);
    EXPECT_EQ(support(x), support(inst.x));
    EXPECT_LE((x - inst.x).norm(), 1e-10 * inst.x.norm());
  }
}

TEST(BruteForceL0, ZeroDataAndGuard) {
  Rng rng(1);
  const auto phi = gaussian_matrix(8, 10, rng);
  EXPECT_EQ(brute_force_l0(Eigen::VectorXd::Zero(8), phi, 3), Eigen::VectorXd::Zero(10));
  const auto big = gaussian_matrix(10, 100, rng);
  EXPECT_THROW(brute_force_l0(Eigen::VectorXd::Zero(10), big, 5), InstanceTooLarge);
  EXPECT_EQ(binomial(100, 5), 75'287'520u);
  EXPECT_EQ(binomial(10, 0), 1u);
  EXPECT_EQ(binomial(3, 4), 0u);
  EXPECT_EQ(binomial(200, 100), UINT64_MAX);
}

TEST(BruteForceL0, BestResidualAmongAllSupports) {
  // Noisy data: the oracle residual is no larger than any other support's.
  Rng rng(77);
  const auto phi = gaussian_matrix(6, 7, rng);
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) y(i) = rng.normal();
  const Eigen::VectorXd x = brute_force_l0(y, phi, 2);
  EXPECT_LE(static_cast<int>(support(x).size()), 2);
  const double best = (y - phi.phi * x).squaredNorm();
  for (int i = 0; i < 7; ++i)
    for (int j = i + 1; j < 7; ++j) {
      Eigen::MatrixXd sub(6, 2);
      sub << phi.phi.col(i), phi.phi.col(j);
      const Eigen::VectorXd c = sub.colPivHouseholderQr().solve(y);
      EXPECT_LE(best, (y - sub * c).squaredNorm() + 1e-12);
    }
}
