#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cke/qsystem.hpp"
#include "cke/realizability.hpp"
#include "test_support.hpp"

namespace cke {
namespace {

const Complex kI(0.0, 1.0);

ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

TEST(CavityPlant, Matrices) {
  const auto plant = build_cavity_plant(0.5, 0.5, 0.0);
  EXPECT_EQ(plant.n(), 1);
  EXPECT_LT(max_abs(plant.F() - mat2(-0.5, 0, 0, -0.5)), 1e-15);
  EXPECT_NEAR(plant.G("A")(0, 0).real(), -0.70710678, 1e-8);
  EXPECT_NEAR(plant.G("U")(1, 1).real(), -0.70710678, 1e-8);
  EXPECT_NEAR(plant.H("Y")(0, 0).real(), 0.70710678, 1e-8);
  EXPECT_EQ(plant.K("Y", "A"), ComplexMatrix::Identity(2, 2));
  EXPECT_EQ(plant.K("Y", "U"), ComplexMatrix::Zero(2, 2));
  ASSERT_TRUE(plant.C().has_value());
  EXPECT_NEAR((*plant.C())(0, 0).real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR((*plant.C())(0, 1).real(), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(CavityPlant, RejectsNonPositiveRates) {
  EXPECT_THROW(build_cavity_plant(0.0, 0.5, 0.0), std::invalid_argument);
  EXPECT_THROW(build_cavity_plant(0.5, -1.0, 0.0), std::invalid_argument);
}

TEST(SqueezerController, Matrices) {
  const auto ctrl = build_squeezer_controller(5.0, 5.0, Complex(-0.5, 0.0));
  EXPECT_LT(max_abs(ctrl.F_c() - mat2(-5, 0.5, 0.5, -5)), 1e-15);
  EXPECT_NEAR(ctrl.G_c1()(0, 0).real(), -2.2360680, 1e-7);
  EXPECT_NEAR(ctrl.G_c2()(0, 0).real(), -2.2360680, 1e-7);
  EXPECT_NEAR(ctrl.H_tilde()(1, 1).real(), 2.2360680, 1e-7);
  EXPECT_NEAR(ctrl.H_c()(0, 0).real(), 2.2360680, 1e-7);
  EXPECT_EQ(ctrl.K_tilde1(), ComplexMatrix::Identity(2, 2));
  EXPECT_EQ(ctrl.K_tilde2(), ComplexMatrix::Zero(2, 2));
  EXPECT_EQ(ctrl.K_c1(), ComplexMatrix::Zero(2, 2));
  EXPECT_EQ(ctrl.K_c2(), ComplexMatrix::Identity(2, 2));
  EXPECT_TRUE(ctrl.has_feedback());
}

TEST(QuantumLinearSystem, RejectsBadBlocks) {
  const ComplexMatrix F = mat2(-1, 0, 0, -1);
  EXPECT_THROW(QuantumLinearSystem(1, F, {{"A", 1, ComplexMatrix::Zero(2, 4)}}, {}), ShapeError);
  EXPECT_THROW(QuantumLinearSystem(1, mat2(-1, 1, 0, -1), {}, {}), StructureError);
  EXPECT_THROW(QuantumLinearSystem(1, F, {{"A", 1, ComplexMatrix::Zero(2, 2)}, {"A", 1, ComplexMatrix::Zero(2, 2)}},
                                   {}),
               ShapeError);
}

TEST(QuantumLinearSystem, AbsentChannelsAreEmpty) {
  const auto plant = build_cavity_plant(1.0, 1.0, 0.0);
  EXPECT_FALSE(plant.has_input("Atilde"));
  EXPECT_EQ(plant.input_width("Atilde"), 0);
  EXPECT_EQ(plant.G("Atilde").cols(), 0);
  EXPECT_EQ(plant.G_all().cols(), 4);
  EXPECT_EQ(plant.K_all().rows(), 2);
}

TEST(CoherentController, RequiresEstimationPorts) {
  const auto plant = build_cavity_plant(1.0, 1.0, 0.0);
  EXPECT_THROW(CoherentController{plant}, ShapeError);
}

TEST(Realizability, CavityIsCanonical) {
  const auto plant = build_cavity_plant(0.5, 0.5, 0.0);
  const auto result = check_physical_realizability(plant);
  ASSERT_TRUE(result.ok()) << result.failure().message();
  const auto& r = result.realization();
  EXPECT_LT(max_abs(r.theta - signature(1)), 1e-12);
  EXPECT_LT(max_abs(r.M), 1e-12);
  // The unused control input gets a synthetic output.
  EXPECT_EQ(r.padded_rows(), 2);
  EXPECT_LT(r.residuals.max(), 1e-12);
}

TEST(Realizability, SqueezerHamiltonian) {
  const auto ctrl = build_squeezer_controller(5.0, 5.0, Complex(-0.5, 0.0));
  const auto result = check_controller_realizability(ctrl);
  ASSERT_TRUE(result.ok()) << result.failure().message();
  const auto& r = result.realization();
  EXPECT_LT(max_abs(r.theta - signature(1)), 1e-12);
  EXPECT_LT(max_abs(r.M - mat2(0, 0.5 * kI, -0.5 * kI, 0)), 1e-12);
  EXPECT_EQ(r.padded_rows(), 0);
}

TEST(Realizability, AmplifiedFeedthroughFails) {
  const ComplexMatrix I = ComplexMatrix::Identity(2, 2);
  const QuantumLinearSystem sys(1, -0.5 * I, {{"A", 1, -I}}, {{"Y", 1, I, {{"A", 2.0 * I}}}});
  const auto result = check_physical_realizability(sys);
  ASSERT_FALSE(result.ok());
  EXPECT_EQ(result.failure().clause, RealizabilityClause::KNotIdentity);
}

TEST(Realizability, WrongDampingFailsCoupling) {
  // Loss rate inconsistent with the coupling strength.
  const ComplexMatrix I = ComplexMatrix::Identity(2, 2);
  const QuantumLinearSystem sys(1, -2.0 * I, {{"A", 1, -I}}, {{"Y", 1, I, {{"A", I}}}});
  const auto result = check_physical_realizability(sys);
  ASSERT_FALSE(result.ok());
  EXPECT_NE(result.failure().clause, RealizabilityClause::KNotIdentity);
}

TEST(Realizability, BeamSplitterIsStaticScattering) {
  for (double deg : {0.0, 30.0, 45.0, 90.0}) {
    const auto bs = build_beam_splitter_controller(deg * M_PI / 180.0);
    const ComplexMatrix K = bs.system().K_all();
    EXPECT_LT(max_abs(K * K.adjoint() - ComplexMatrix::Identity(4, 4)), 1e-14);
    EXPECT_TRUE(check_controller_realizability(bs).ok()) << deg;
  }
}

TEST(BeamSplitter, FiftyFiftyOutputs) {
  const auto bs = build_beam_splitter_controller(M_PI / 4.0);
  const double h = std::sqrt(0.5);
  // Rows are [y1, y2, y1#, y2#], columns [atilde, atilde#, y, y#].
  const ComplexMatrix from_vacuum = bs.K_tilde1();
  const ComplexMatrix from_plant = bs.K_tilde2();
  EXPECT_NEAR(from_plant(0, 0).real(), h, 1e-15);
  EXPECT_NEAR(from_vacuum(0, 0).real(), h, 1e-15);
  EXPECT_NEAR(from_plant(1, 0).real(), -h, 1e-15);
  EXPECT_NEAR(from_vacuum(1, 0).real(), h, 1e-15);
  EXPECT_FALSE(bs.has_feedback());

  const auto pass = build_beam_splitter_controller(0.0);
  EXPECT_NEAR(pass.K_tilde2()(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(pass.K_tilde1()(1, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(pass.K_tilde2()(1, 0).real(), 0.0, 1e-15);
}

TEST(Realize, CanonicalExamples) {
  const ComplexMatrix J = signature(1);
  const auto empty = realize(J, ComplexMatrix::Zero(2, 2), ComplexMatrix::Identity(2, 2));
  EXPECT_LT(max_abs(empty.F() + 0.5 * ComplexMatrix::Identity(2, 2)), 1e-15);
  EXPECT_LT(max_abs(empty.G("in") + ComplexMatrix::Identity(2, 2)), 1e-15);
  EXPECT_EQ(empty.H("out"), ComplexMatrix::Identity(2, 2));

  const auto detuned = realize(J, ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(2, 2));
  EXPECT_LT(max_abs(detuned.F() - mat2(Complex(-0.5, -1), 0, 0, Complex(-0.5, 1))), 1e-15);
}

TEST(Realize, RebuildsShippedDevices) {
  const ComplexMatrix J = signature(1);
  const auto cavity = realize(J, ComplexMatrix::Zero(2, 2), std::sqrt(0.5) * ComplexMatrix::Identity(2, 2));
  EXPECT_LT(max_abs(cavity.F() + 0.25 * ComplexMatrix::Identity(2, 2)), 1e-15);
  EXPECT_LT(max_abs(cavity.G("in") + std::sqrt(0.5) * ComplexMatrix::Identity(2, 2)), 1e-15);

  // Two mirrors of rate 5 and a squeezing term: the controller device.
  const ComplexMatrix M = mat2(0, 0.5 * kI, -0.5 * kI, 0);
  const ComplexMatrix N = delta_embed(ComplexMatrix::Constant(2, 1, std::sqrt(5.0)), ComplexMatrix::Zero(2, 1)).full();
  const auto squeezer = realize(J, M, N);
  const auto reference = build_squeezer_controller(5.0, 5.0, Complex(-0.5, 0.0));
  EXPECT_LT(max_abs(squeezer.F() - reference.F_c()), 1e-14);
}

TEST(Realize, UncoupledOscillator) {
  const auto closed = realize(signature(1), ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 2));
  EXPECT_EQ(max_abs(closed.F()), 0.0);
  EXPECT_EQ(max_abs(closed.G("in")), 0.0);
  EXPECT_EQ(max_abs(closed.H("out")), 0.0);
  EXPECT_EQ(closed.K("out", "in"), ComplexMatrix::Identity(2, 2));
}

TEST(Realize, RejectsInvalidTriples) {
  const ComplexMatrix I = ComplexMatrix::Identity(2, 2);
  EXPECT_THROW(realize(I, ComplexMatrix::Zero(2, 2), I), StructureError);
  EXPECT_THROW(realize(signature(1), mat2(0, 1, 0, 0), I), StructureError);
  EXPECT_THROW(realize(signature(1), ComplexMatrix::Zero(4, 4), I), ShapeError);
}

// Any (Theta, M, N) with valid structure generates a realizable system whose
// certificate recovers the generating triple.
TEST(RealizeProperty, RandomRoundTrip) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> modes(1, 3);
  std::uniform_int_distribution<int> fields(1, 2);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = modes(rng);
    const Index m = fields(rng);
    const ComplexMatrix T = ComplexMatrix::Identity(2 * n, 2 * n) + testing::random_delta(rng, n, n, 0.2);
    const ComplexMatrix theta = T * signature(n) * T.adjoint();
    const ComplexMatrix M = testing::random_hermitian_delta(rng, n);
    const ComplexMatrix N = testing::random_delta(rng, m, n);
    const QuantumLinearSystem sys = realize(theta, M, N);
    const auto result = check_physical_realizability(sys, 1e-8);
    ASSERT_TRUE(result.ok()) << "trial " << trial << ": " << result.failure().message();
    const auto& r = result.realization();
    ASSERT_LT(max_abs(r.theta - theta), 1e-6 * (1 + max_abs(theta))) << trial;
    ASSERT_LT(max_abs(r.M - M), 1e-6 * (1 + max_abs(M))) << trial;
    ASSERT_LT(max_abs(r.N - N), 1e-9) << trial;
    ASSERT_LT(r.residuals.max(), 1e-8) << trial;
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

// Perturbing the damping of a realizable system breaks realizability.
TEST(RealizeProperty, PerturbedDampingIsRejected) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const ComplexMatrix M = testing::random_hermitian_delta(rng, 1);
    const ComplexMatrix N = testing::random_delta(rng, 1, 1);
    const QuantumLinearSystem good = realize(signature(1), M, N);
    const QuantumLinearSystem bad(1, good.F() - 0.5 * ComplexMatrix::Identity(2, 2), good.input_channels(),
                                  good.output_channels());
    ASSERT_FALSE(check_physical_realizability(bad).ok()) << trial;
  }
}

}  // namespace
}  // namespace cke
