#pragma once

// Optimal classical (Kalman) estimator for a homodyne-detected linear quantum
// system. With measurement matrix C_m = L H_a, noise feedthrough D = L K_a and
// noise Ito matrix V (the identity for canonical fields), the error covariance
// P is the stabilizing solution of
//
//   F_a P + P F_a^dagger + G_a V G_a^dagger
//     - (G_a V D^dagger + P C_m^dagger) R^-1 (G_a V D^dagger + P C_m^dagger)^dagger = 0,
//   R = D V D^dagger,
//
// the gain is G_e = (G_a V D^dagger + P C_m^dagger) R^-1, the filter matrix is
// F_e = F_a - G_e C_m and the cost is J = C_a P C_a^dagger.

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cke/doubled_algebra.hpp"
#include "cke/errors.hpp"
#include "cke/homodyne.hpp"
#include "cke/interconnect.hpp"
#include "cke/lyapunov.hpp"

namespace cke {

enum class NoiseConvention {
  Canonical,          // dA dA^dagger = I dt on the whole doubled field
  SymmetrizedVacuum,  // symmetrized vacuum covariance, I/2
};

inline double noise_intensity(NoiseConvention noise) {
  return noise == NoiseConvention::Canonical ? 1.0 : 0.5;
}

struct SynthesisOptions {
  double tol = 1e-10;
  NoiseConvention noise = NoiseConvention::Canonical;
};

/// Raw filtering problem: state matrix F, noise input G, output H, noise
/// feedthrough K and quadrature selector L.
struct FilterProblem {
  ComplexMatrix F, G, H, K, L;
  double noise = 1.0;

  static FilterProblem from(const AugmentedSystem& aug, const HomodyneScheme& hd,
                            NoiseConvention convention = NoiseConvention::Canonical) {
    if (hd.channels() != aug.measured_half_width) {
      throw ShapeError("homodyne scheme has " + std::to_string(hd.channels()) + " detectors, measured field has " +
                       std::to_string(aug.measured_half_width) + " channels");
    }
    return {aug.F_a, aug.G_a, aug.H_a, aug.K_a, hd.L_complex(), noise_intensity(convention)};
  }

  ComplexMatrix measurement() const { return L * H; }
  ComplexMatrix innovation() const { return noise * L * K * K.adjoint() * L.adjoint(); }
  ComplexMatrix cross() const { return noise * G * K.adjoint() * L.adjoint(); }
  ComplexMatrix process() const { return noise * G * G.adjoint(); }
};

struct RiccatiSolution {
  ComplexMatrix P;
  double residual = 0.0;
  bool stabilizing = false;
  /// (F, L H) passes the PBH detectability test.
  bool detectable = false;
};

struct EstimatorSynthesis {
  ComplexMatrix F_e;
  ComplexMatrix G_e;
  ComplexMatrix H_e;
  RiccatiSolution riccati;
  double cost = 0.0;

  double gain_norm() const { return G_e.norm(); }
};

namespace detail {

inline void check_problem_shapes(const FilterProblem& p) {
  const Index n = p.F.rows();
  if (p.F.cols() != n || p.G.rows() != n || p.H.cols() != n || p.K.rows() != p.H.rows() ||
      p.K.cols() != p.G.cols() || p.L.cols() != p.H.rows()) {
    throw ShapeError("filter problem matrices do not conform");
  }
}

inline Eigen::MatrixXcd checked_innovation_inverse(const FilterProblem& p) {
  const ComplexMatrix R = p.innovation();
  if (max_abs(R - R.adjoint()) > 1e-10 * (1.0 + max_abs(R))) {
    throw StructureError("innovation covariance L K K^dagger L^dagger is not Hermitian");
  }
  if (R.imag().cwiseAbs().maxCoeff() > 1e-10 * (1.0 + max_abs(R))) {
    throw StructureError("innovation covariance of the classical signal is not real");
  }
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(0.5 * (R + R.adjoint()), Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo >= 1e12) {
    throw SolverError(SolverFailure::SingularInnovation,
                      "innovation covariance eigenvalues in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "]; a measured quadrature carries no shot noise");
  }
  return R.inverse();
}

inline ComplexMatrix gain_for(const FilterProblem& p, const ComplexMatrix& P, const ComplexMatrix& R_inv) {
  return (p.cross() + P * p.measurement().adjoint()) * R_inv;
}

inline bool pbh_detectable(const ComplexMatrix& F, const ComplexMatrix& C) {
  if (F.size() == 0) return true;
  const Eigen::ComplexEigenSolver<ComplexMatrix> eig(F, false);
  const Index n = F.rows();
  for (Index k = 0; k < n; ++k) {
    const Complex lambda = eig.eigenvalues()(k);
    if (lambda.real() < -1e-12) continue;
    ComplexMatrix pencil(n + C.rows(), n);
    pencil.topRows(n) = lambda * ComplexMatrix::Identity(n, n) - F;
    pencil.bottomRows(C.rows()) = C;
    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(pencil);
    qr.setThreshold(1e-10);
    if (qr.rank() < n) return false;
  }
  return true;
}

// Matrix sign function by scaled Newton iteration.
inline ComplexMatrix matrix_sign(ComplexMatrix Z) {
  const Index n = Z.rows();
  bool scale = true;
  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<ComplexMatrix> lu(Z);
    if (!(lu.rcond() > 1e-14)) {
      throw SolverError(SolverFailure::NoStabilizingSolution,
                        "Hamiltonian matrix has eigenvalues on or near the imaginary axis");
    }
    double c = 1.0;
    if (scale) c = std::pow(std::abs(lu.determinant()), -1.0 / static_cast<double>(n));
    if (!std::isfinite(c) || c <= 0.0) c = 1.0;
    const ComplexMatrix next = 0.5 * (c * Z + lu.inverse() / c);
    const double change = (next - Z).cwiseAbs().colwise().sum().maxCoeff();
    const double size = next.cwiseAbs().colwise().sum().maxCoeff();
    Z = next;
    if (change < 1e-2 * size) scale = false;
    if (change <= 1e-14 * size) return Z;
  }
  throw SolverError(SolverFailure::IllConditioned, "matrix sign iteration did not converge");
}

}  // namespace detail

/// Max-abs defect of the filter Riccati equation at P.
inline double are_residual(const FilterProblem& p, const ComplexMatrix& P) {
  const Eigen::MatrixXcd R_inv = detail::checked_innovation_inverse(p);
  const ComplexMatrix B = p.cross() + P * p.measurement().adjoint();
  return max_abs(p.F * P + P * p.F.adjoint() + p.process() - B * R_inv * B.adjoint());
}

inline ComplexMatrix filter_gain(const FilterProblem& p, const ComplexMatrix& P) {
  return detail::gain_for(p, P, detail::checked_innovation_inverse(p));
}

/// Stabilizing solution of the filter Riccati equation. The stable invariant
/// subspace of the associated Hamiltonian matrix is taken from its matrix
/// sign, then polished with Newton-Kleinman steps and certified.
inline RiccatiSolution solve_filter_riccati(const FilterProblem& p, double tol = 1e-10) {
  detail::check_problem_shapes(p);
  const Index n = p.F.rows();
  const Eigen::MatrixXcd R_inv = detail::checked_innovation_inverse(p);
  const ComplexMatrix Cm = p.measurement();
  const ComplexMatrix S = p.cross();

  // Decorrelated form: A P + P A^dagger - P B P + Q = 0.
  const ComplexMatrix A = p.F - S * R_inv * Cm;
  const ComplexMatrix B = Cm.adjoint() * R_inv * Cm;
  const ComplexMatrix Q = p.process() - S * R_inv * S.adjoint();

  RiccatiSolution out;
  out.detectable = detail::pbh_detectable(p.F, Cm);
  if (n == 0) {
    out.P = ComplexMatrix(0, 0);
    out.stabilizing = true;
    return out;
  }
  if (!out.detectable) {
    throw SolverError(SolverFailure::NoStabilizingSolution,
                      "an unstable or marginal mode is invisible to the measured quadratures");
  }

  // [I; P] spans the stable invariant subspace of Z.
  ComplexMatrix Z(2 * n, 2 * n);
  Z << A.adjoint(), -B, -Q, -A;
  const ComplexMatrix W = detail::matrix_sign(Z);
  const ComplexMatrix projector = 0.5 * (ComplexMatrix::Identity(2 * n, 2 * n) - W);
  Eigen::ColPivHouseholderQR<ComplexMatrix> qr(projector);
  qr.setThreshold(1e-8);
  if (qr.rank() != n) {
    throw SolverError(SolverFailure::NoStabilizingSolution,
                      "stable subspace has dimension " + std::to_string(qr.rank()) + ", expected " +
                          std::to_string(n));
  }
  const ComplexMatrix basis = ComplexMatrix(qr.householderQ()).leftCols(n);
  const Eigen::PartialPivLU<ComplexMatrix> top(basis.topRows(n));
  if (!(top.rcond() > 1e-12)) {
    throw SolverError(SolverFailure::IllConditioned, "stable subspace is not a graph over the state space");
  }
  ComplexMatrix P = basis.bottomRows(n) * top.inverse();
  P = 0.5 * (P + P.adjoint());

  // Newton-Kleinman refinement, kept only while it helps.
  double residual = are_residual(p, P);
  for (int step = 0; step < 4; ++step) {
    const ComplexMatrix gain = detail::gain_for(p, P, R_inv);
    const ComplexMatrix closed = p.F - gain * Cm;
    if (!is_hurwitz(closed)) break;
    const ComplexMatrix drive = p.G - gain * p.L * p.K;
    const ComplexMatrix next = solve_lyapunov(closed, p.noise * drive * drive.adjoint());
    const double next_residual = are_residual(p, next);
    if (!(next_residual < residual)) break;
    P = next;
    residual = next_residual;
  }

  out.P = P;
  out.residual = residual;
  const ComplexMatrix filter = p.F - detail::gain_for(p, P, R_inv) * Cm;
  out.stabilizing = is_hurwitz(filter);

  const double bound = tol * (1.0 + P.norm());
  if (!(residual < bound)) {
    throw SolverError(SolverFailure::NoStabilizingSolution,
                      "Riccati residual " + std::to_string(residual) + " exceeds " + std::to_string(bound));
  }
  if (!out.stabilizing) {
    throw SolverError(SolverFailure::NoStabilizingSolution, "filter matrix is not Hurwitz");
  }
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(P, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10 * (1.0 + P.norm())) {
    throw SolverError(SolverFailure::NoStabilizingSolution, "Riccati solution is not positive semidefinite");
  }
  return out;
}

inline RiccatiSolution solve_filter_riccati(const AugmentedSystem& aug, const HomodyneScheme& hd,
                                            const SynthesisOptions& opts = {}) {
  return solve_filter_riccati(FilterProblem::from(aug, hd, opts.noise), opts.tol);
}

/// Scalar cost C_a P C_a^dagger; a non-negligible imaginary part means a
/// Hermiticity invariant was broken upstream.
inline double estimation_cost(const ComplexMatrix& C_a, const ComplexMatrix& P) {
  const Complex j = (C_a * P * C_a.adjoint())(0, 0);
  if (std::abs(j.imag()) > 1e-10) {
    throw StructureError("estimation cost has imaginary part " + std::to_string(j.imag()));
  }
  return j.real();
}

inline EstimatorSynthesis synthesize_estimator(const AugmentedSystem& aug, const HomodyneScheme& hd,
                                               const SynthesisOptions& opts = {}) {
  const FilterProblem problem = FilterProblem::from(aug, hd, opts.noise);
  EstimatorSynthesis est;
  est.riccati = solve_filter_riccati(problem, opts.tol);
  est.G_e = filter_gain(problem, est.riccati.P);
  est.F_e = aug.F_a - est.G_e * problem.L * aug.H_a;
  est.H_e = aug.C_a;
  est.cost = estimation_cost(aug.C_a, est.riccati.P);
  return est;
}

/// Steady error variance of z - z_hat for an arbitrary filter gain, from the
/// joint Lyapunov equation of (plant + controller) and filter driven by the
/// same noise. Independent of the Riccati route.
inline double cost_for_gain(const AugmentedSystem& aug, const HomodyneScheme& hd, const ComplexMatrix& gain,
                            NoiseConvention convention = NoiseConvention::Canonical) {
  const ComplexMatrix L = hd.L_complex();
  const Index n = aug.F_a.rows();
  if (gain.rows() != n || gain.cols() != L.rows()) throw ShapeError("cost_for_gain: gain shape mismatch");
  const ComplexMatrix F_e = aug.F_a - gain * L * aug.H_a;

  ComplexMatrix A = ComplexMatrix::Zero(2 * n, 2 * n);
  A.topLeftCorner(n, n) = aug.F_a;
  A.bottomLeftCorner(n, n) = gain * L * aug.H_a;
  A.bottomRightCorner(n, n) = F_e;
  ComplexMatrix B(2 * n, aug.G_a.cols());
  B.topRows(n) = aug.G_a;
  B.bottomRows(n) = gain * L * aug.K_a;

  const ComplexMatrix sigma = solve_lyapunov(A, noise_intensity(convention) * B * B.adjoint());
  ComplexMatrix error_row(1, 2 * n);
  error_row << aug.C_a, -aug.C_a;
  return estimation_cost(error_row, sigma);
}

inline double cost_via_joint_lyapunov(const AugmentedSystem& aug, const EstimatorSynthesis& est,
                                      const HomodyneScheme& hd,
                                      NoiseConvention convention = NoiseConvention::Canonical) {
  return cost_for_gain(aug, hd, est.G_e, convention);
}

/// Variance of z with no measurement at all.
inline double unfiltered_variance(const AugmentedSystem& aug,
                                  NoiseConvention convention = NoiseConvention::Canonical) {
  const ComplexMatrix sigma =
      solve_lyapunov(aug.F_a, noise_intensity(convention) * aug.G_a * aug.G_a.adjoint());
  return estimation_cost(aug.C_a, sigma);
}

}  // namespace cke
