#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cke/homodyne.hpp"
#include "cke/interconnect.hpp"
#include "cke/lyapunov.hpp"
#include "cke/synthesis.hpp"
#include "test_support.hpp"

namespace cke {
namespace {

AugmentedSystem squeezer_loop() {
  return close_loop(build_cavity_plant(0.5, 0.5, 0.0), build_squeezer_controller(5.0, 5.0, Complex(-0.5, 0.0)));
}

ComplexMatrix scalar(Complex v) { return ComplexMatrix::Constant(1, 1, v); }

// Scalar problem dx = -x dt + dw1, dy = x dt + dw2: P^2 + 2P - 1 = 0.
FilterProblem scalar_problem() {
  ComplexMatrix G(1, 2), K(1, 2);
  G << 1, 0;
  K << 0, 1;
  return {scalar(-1.0), G, scalar(1.0), K, scalar(1.0)};
}

TEST(Lyapunov, Examples) {
  EXPECT_LT(max_abs(solve_lyapunov(-ComplexMatrix::Identity(2, 2), 2.0 * ComplexMatrix::Identity(2, 2)) -
                    ComplexMatrix::Identity(2, 2)),
            1e-14);
  EXPECT_NEAR(solve_lyapunov(scalar(-0.5), scalar(1.0))(0, 0).real(), 1.0, 1e-15);
}

TEST(Lyapunov, MoreExamples) {
  const ComplexMatrix I = ComplexMatrix::Identity(2, 2);
  EXPECT_LT(max_abs(solve_lyapunov(-I, I) - 0.5 * I), 1e-15);
  EXPECT_LT(max_abs(solve_lyapunov(-0.5 * I, I) - I), 1e-15);
  ComplexMatrix A = ComplexMatrix::Zero(2, 2);
  A(0, 0) = -1;
  A(1, 1) = -2;
  EXPECT_EQ(max_abs(solve_lyapunov(A, ComplexMatrix::Zero(2, 2))), 0.0);
  EXPECT_TRUE(is_hurwitz(-0.5 * I));
}

TEST(Lyapunov, RejectsUnstable) {
  try {
    solve_lyapunov(scalar(0.1), scalar(1.0));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverFailure::NotHurwitz);
  }
}

TEST(Lyapunov, MatchesKroneckerSolve) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + trial % 6;
    ComplexMatrix a = testing::random_complex(rng, n, n);
    a -= (spectral_abscissa(a) + 0.5) * ComplexMatrix::Identity(n, n);
    const ComplexMatrix b = testing::random_complex(rng, n, n);
    const ComplexMatrix q = b * b.adjoint();
    const ComplexMatrix x = solve_lyapunov(a, q);
    ASSERT_LT(max_abs(x - testing::kron_lyapunov(a, q)), 1e-9 * (1 + max_abs(x))) << trial;
  }
}

TEST(IsHurwitz, Examples) {
  EXPECT_TRUE(is_hurwitz(-ComplexMatrix::Identity(2, 2)));
  ComplexMatrix rot(2, 2);
  rot << 0, 1, -1, 0;
  EXPECT_FALSE(is_hurwitz(rot));
  EXPECT_FALSE(is_hurwitz(-1e-3 * ComplexMatrix::Identity(1, 1), 1e-2));
}

TEST(Riccati, ScalarKnownSolution) {
  const RiccatiSolution sol = solve_filter_riccati(scalar_problem());
  EXPECT_NEAR(sol.P(0, 0).real(), std::sqrt(2.0) - 1.0, 1e-12);
  EXPECT_TRUE(sol.stabilizing);
  EXPECT_TRUE(sol.detectable);
  EXPECT_NEAR(filter_gain(scalar_problem(), sol.P)(0, 0).real(), std::sqrt(2.0) - 1.0, 1e-12);
}

TEST(Riccati, SingularInnovationIsReported) {
  FilterProblem p = scalar_problem();
  p.K.setZero();
  try {
    solve_filter_riccati(p);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverFailure::SingularInnovation);
  }
}

TEST(Riccati, UndetectableUnstableModeIsReported) {
  // This loop has an unstable mode that the 135 degree quadrature cannot see.
  const AugmentedSystem aug =
      close_loop(build_cavity_plant(0.5, 0.5, 0.0), build_squeezer_controller(1.0, 1.0, Complex(-0.75, 0.0)));
  EXPECT_FALSE(is_hurwitz(aug.F_a));
  try {
    synthesize_estimator(aug, quadrature_selector({135.0}));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), SolverFailure::NoStabilizingSolution);
  }
  EXPECT_NO_THROW(synthesize_estimator(aug, quadrature_selector({134.0})));
}

TEST(Riccati, ShapeMismatchIsReported) {
  FilterProblem p = scalar_problem();
  p.L = ComplexMatrix::Identity(2, 2);
  EXPECT_THROW(solve_filter_riccati(p), ShapeError);
}

TEST(Riccati, ClassicalCavityHasVacuumCovariance) {
  const AugmentedSystem aug = classical_only(build_cavity_plant(0.5, 0.5, 0.0));
  for (double deg = 0.0; deg < 180.0; deg += 7.5) {
    const auto est = synthesize_estimator(aug, quadrature_selector({deg}));
    ASSERT_LT(max_abs(est.riccati.P - ComplexMatrix::Identity(2, 2)), 1e-10) << deg;
    ASSERT_NEAR(est.cost, 1.0, 1e-10) << deg;
  }
}

TEST(Riccati, MatchesRiccatiFlowOracle) {
  const AugmentedSystem aug = squeezer_loop();
  for (double deg : {0.0, 30.0, 45.0, 90.0, 135.0}) {
    const HomodyneScheme hd = quadrature_selector({deg});
    const RiccatiSolution sol = solve_filter_riccati(aug, hd);
    const testing::RiccatiFlowOracle flow{aug.F_a, aug.G_a, aug.H_a, aug.K_a, hd.L_complex()};
    const ComplexMatrix P = flow.solve(1e-2);
    ASSERT_LT(max_abs(sol.P - P), 1e-10) << deg;
  }
}

// Frozen regression values; the flow oracle above confirms each covariance.
TEST(Synthesis, SqueezerControllerFrozenCosts) {
  const AugmentedSystem aug = squeezer_loop();
  const std::pair<double, double> frozen[] = {
      {0.0, 0.927366179279407}, {45.0, 0.9358974358974363}, {90.0, 0.9273661792794079}, {135.0, 0.9049210504445504}};
  for (const auto& [deg, cost] : frozen) {
    EXPECT_NEAR(synthesize_estimator(aug, quadrature_selector({deg})).cost, cost, 1e-10) << deg;
  }
  EXPECT_NEAR(unfiltered_variance(aug), 73.0 / 78.0, 1e-12);
}

TEST(Synthesis, ClassicalCavityOracleAndZeroGain) {
  const AugmentedSystem aug = classical_only(build_cavity_plant(0.5, 0.5, 0.0));
  const HomodyneScheme hd = quadrature_selector({135.0});
  const auto est = synthesize_estimator(aug, hd);
  EXPECT_LT(est.gain_norm(), 1e-12);
  EXPECT_NEAR(cost_via_joint_lyapunov(aug, est, hd), 1.0, 1e-12);
  EXPECT_NEAR(cost_for_gain(aug, hd, ComplexMatrix::Zero(2, 1)), 1.0, 1e-12);
  EXPECT_NEAR(unfiltered_variance(aug), 1.0, 1e-12);
}

TEST(Synthesis, GainFormula) {
  const AugmentedSystem aug = squeezer_loop();
  const HomodyneScheme hd = quadrature_selector({60.0});
  const auto est = synthesize_estimator(aug, hd);
  const ComplexMatrix L = hd.L_complex();
  const ComplexMatrix R = L * aug.K_a * aug.K_a.adjoint() * L.adjoint();
  const ComplexMatrix expected =
      (aug.G_a * aug.K_a.adjoint() * L.adjoint() + est.riccati.P * aug.H_a.adjoint() * L.adjoint()) * R.inverse();
  EXPECT_LT(max_abs(est.G_e - expected), 1e-12);
  EXPECT_LT(max_abs(est.F_e - (aug.F_a - est.G_e * L * aug.H_a)), 1e-12);
  EXPECT_TRUE(is_hurwitz(est.F_e));
}

TEST(Synthesis, SymmetrizedNoiseHalvesCost) {
  const AugmentedSystem aug = squeezer_loop();
  const HomodyneScheme hd = quadrature_selector({135.0});
  const double canonical = synthesize_estimator(aug, hd).cost;
  const double symmetrized = synthesize_estimator(aug, hd, {1e-10, NoiseConvention::SymmetrizedVacuum}).cost;
  EXPECT_NEAR(symmetrized, 0.5 * canonical, 1e-12);
}

// Properties over angles and random systems.

TEST(SynthesisProperty, RiccatiCostMatchesJointLyapunov) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> rate(0.2, 6.0), chi(-1.0, 1.0), deg(-360.0, 360.0);
  for (int trial = 0; trial < 60; ++trial) {
    const double k = rate(rng);
    const Complex c(chi(rng), chi(rng));
    if (std::abs(c) >= 0.45 * k) continue;
    const AugmentedSystem aug =
        close_loop(build_cavity_plant(rate(rng), rate(rng), 0.0), build_squeezer_controller(k, k, c));
    const HomodyneScheme hd = quadrature_selector({deg(rng)});
    const auto est = synthesize_estimator(aug, hd);
    const double oracle = cost_via_joint_lyapunov(aug, est, hd);
    ASSERT_NEAR(est.cost, oracle, 1e-8 * (1 + est.cost)) << trial;
  }
}

TEST(SynthesisProperty, OptimalGainIsStationary) {
  std::mt19937_64 rng(52);
  const AugmentedSystem aug = squeezer_loop();
  for (double deg : {0.0, 45.0, 100.0, 135.0}) {
    const HomodyneScheme hd = quadrature_selector({deg});
    const auto est = synthesize_estimator(aug, hd);
    for (int trial = 0; trial < 20; ++trial) {
      // No direction lowers the cost; the increase is second order.
      ComplexMatrix dir = testing::random_complex(rng, est.G_e.rows(), est.G_e.cols());
      dir /= dir.norm();
      const double perturbed = cost_for_gain(aug, hd, est.G_e + 1e-4 * dir);
      ASSERT_GE(perturbed, est.cost - 1e-12) << deg;
      ASSERT_LT(perturbed - est.cost, 1e-6) << deg;
    }
  }
}

TEST(SynthesisProperty, PassiveNetworksGiveFlatUnitCost) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> rate(0.1, 8.0), deg(0.0, 180.0);
  for (int trial = 0; trial < 40; ++trial) {
    const AugmentedSystem aug = close_loop(build_cavity_plant(rate(rng), rate(rng), 0.0),
                                           build_squeezer_controller(rate(rng), rate(rng), 0.0));
    const double cost = synthesize_estimator(aug, quadrature_selector({deg(rng)})).cost;
    ASSERT_NEAR(cost, 1.0, 1e-9) << trial;
  }
}

TEST(SynthesisProperty, FilteringNeverExceedsUnfilteredVariance) {
  std::mt19937_64 rng(54);
  std::uniform_real_distribution<double> rate(0.5, 6.0), chi(-0.2, 0.2), deg(0.0, 180.0);
  for (int trial = 0; trial < 40; ++trial) {
    const AugmentedSystem aug = close_loop(build_cavity_plant(rate(rng), rate(rng), Complex(chi(rng), 0)),
                                           build_squeezer_controller(rate(rng), rate(rng), Complex(chi(rng), 0)));
    const double cost = synthesize_estimator(aug, quadrature_selector({deg(rng)})).cost;
    ASSERT_GE(cost, -1e-12);
    ASSERT_LE(cost, unfiltered_variance(aug) + 1e-9) << trial;
  }
}

TEST(SynthesisProperty, HalfTurnPeriodic) {
  const AugmentedSystem aug = squeezer_loop();
  for (double deg = 0.0; deg < 180.0; deg += 11.0) {
    const double a = synthesize_estimator(aug, quadrature_selector({deg})).cost;
    const double b = synthesize_estimator(aug, quadrature_selector({deg + 180.0})).cost;
    ASSERT_NEAR(a, b, 1e-10) << deg;
  }
}

TEST(SynthesisProperty, CovarianceIsHermitianPsd) {
  const AugmentedSystem aug = squeezer_loop();
  for (double deg = 0.0; deg < 180.0; deg += 13.0) {
    const ComplexMatrix P = synthesize_estimator(aug, quadrature_selector({deg})).riccati.P;
    ASSERT_TRUE(is_hermitian(P, 1e-12));
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(P);
    ASSERT_GE(eig.eigenvalues().minCoeff(), -1e-10);
  }
}

}  // namespace
}  // namespace cke
