#pragma once

#include <algorithm>
#include <limits>

#include <Eigen/Eigenvalues>

#include "cke/doubled_algebra.hpp"
#include "cke/errors.hpp"

namespace cke {

/// Largest real part over the spectrum; -inf for an empty matrix.
inline double spectral_abscissa(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("spectral_abscissa: matrix is not square");
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  const Eigen::ComplexEigenSolver<ComplexMatrix> eig(a, false);
  return eig.eigenvalues().real().maxCoeff();
}

inline bool is_hurwitz(const ComplexMatrix& a, double margin = 0.0) {
  return spectral_abscissa(a) < -margin;
}

/// Solves A X + X A^dagger + Q = 0 for Hurwitz A (Bartels-Stewart on the
/// complex Schur form).
inline ComplexMatrix solve_lyapunov(const ComplexMatrix& a, const ComplexMatrix& q) {
  const Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) throw ShapeError("solve_lyapunov: shape mismatch");
  if (n == 0) return ComplexMatrix(0, 0);
  if (!is_hurwitz(a)) {
    throw SolverError(SolverFailure::NotHurwitz,
                      "spectral abscissa " + std::to_string(spectral_abscissa(a)) + " >= 0");
  }

  const Eigen::ComplexSchur<ComplexMatrix> schur(a);
  const ComplexMatrix& U = schur.matrixU();
  const ComplexMatrix& T = schur.matrixT();
  const ComplexMatrix qt = U.adjoint() * q * U;

  // T Y + Y T^dagger = -qt, solved column by column from the right:
  // (T + conj(T_jj) I) y_j = -qt_j - sum_{k>j} conj(T_jk) y_k.
  ComplexMatrix Y = ComplexMatrix::Zero(n, n);
  for (Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = -qt.col(j);
    for (Index k = j + 1; k < n; ++k) rhs -= std::conj(T(j, k)) * Y.col(k);
    ComplexMatrix shifted = T;
    shifted.diagonal().array() += std::conj(T(j, j));
    Y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  ComplexMatrix X = U * Y * U.adjoint();
  return 0.5 * (X + X.adjoint());
}

}  // namespace cke
