#pragma once

// Complex matrix kernel for doubled-up (annihilation / creation) systems.
//
// A doubled matrix has the block form
//
//     Delta(A1, A2) = [ A1        A2      ]
//                     [ conj(A2)  conj(A1) ]
//
// and maps a stacked vector [a; a#] to another stacked vector of the same
// shape. Every system matrix in the library carries this structure.

#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cke/errors.hpp"

namespace cke {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

/// Default absolute per-entry tolerance for structural predicates.
inline constexpr double kStructureTol = 1e-9;

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline void require_finite(const ComplexMatrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw StructureError(std::string(what) + ": matrix has non-finite entries");
  }
}

inline ComplexMatrix adjoint(const ComplexMatrix& m) { return m.adjoint(); }

inline bool is_hermitian(const ComplexMatrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

/// True iff the lower blocks are the conjugates of the upper ones, entrywise
/// within `tol`. Throws ShapeError for odd dimensions.
inline bool is_delta_structured(const ComplexMatrix& m, double tol = kStructureTol) {
  if (m.rows() % 2 != 0 || m.cols() % 2 != 0) {
    throw ShapeError("is_delta_structured: dimensions " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " are not even");
  }
  const Index p = m.rows() / 2;
  const Index q = m.cols() / 2;
  if (p == 0 || q == 0) return true;
  const double lower_left = max_abs(m.bottomLeftCorner(p, q) - m.topRightCorner(p, q).conjugate());
  const double lower_right = max_abs(m.bottomRightCorner(p, q) - m.topLeftCorner(p, q).conjugate());
  return lower_left <= tol && lower_right <= tol;
}

/// Doubled-up matrix stored by its two blocks. `full()` is materialized on
/// demand so the block structure cannot drift.
class DoubledMatrix {
 public:
  DoubledMatrix(ComplexMatrix block1, ComplexMatrix block2)
      : block1_(std::move(block1)), block2_(std::move(block2)) {
    if (block1_.rows() != block2_.rows() || block1_.cols() != block2_.cols()) {
      throw ShapeError("DoubledMatrix: blocks have shapes " + std::to_string(block1_.rows()) + "x" +
                       std::to_string(block1_.cols()) + " and " + std::to_string(block2_.rows()) +
                       "x" + std::to_string(block2_.cols()));
    }
    require_finite(block1_, "DoubledMatrix block1");
    require_finite(block2_, "DoubledMatrix block2");
  }

  /// Extracts the blocks of a matrix that is already doubled-up.
  static DoubledMatrix from_full(const ComplexMatrix& full, double tol = kStructureTol) {
    if (!is_delta_structured(full, tol)) {
      throw StructureError("DoubledMatrix::from_full: matrix is not doubled-up");
    }
    const Index p = full.rows() / 2;
    const Index q = full.cols() / 2;
    return {full.topLeftCorner(p, q), full.topRightCorner(p, q)};
  }

  static DoubledMatrix zero(Index p, Index q) {
    return {ComplexMatrix::Zero(p, q), ComplexMatrix::Zero(p, q)};
  }

  static DoubledMatrix identity(Index p) {
    return {ComplexMatrix::Identity(p, p), ComplexMatrix::Zero(p, p)};
  }

  const ComplexMatrix& block1() const noexcept { return block1_; }
  const ComplexMatrix& block2() const noexcept { return block2_; }
  Index half_rows() const noexcept { return block1_.rows(); }
  Index half_cols() const noexcept { return block1_.cols(); }
  Index rows() const noexcept { return 2 * block1_.rows(); }
  Index cols() const noexcept { return 2 * block1_.cols(); }

  ComplexMatrix full() const {
    const Index p = half_rows();
    const Index q = half_cols();
    ComplexMatrix out(2 * p, 2 * q);
    out.topLeftCorner(p, q) = block1_;
    out.topRightCorner(p, q) = block2_;
    out.bottomLeftCorner(p, q) = block2_.conjugate();
    out.bottomRightCorner(p, q) = block1_.conjugate();
    return out;
  }

  // Delta(A1, A2)^dagger = Delta(A1^dagger, A2^T)
  DoubledMatrix adjoint() const { return {block1_.adjoint(), block2_.transpose()}; }

  friend DoubledMatrix operator*(const DoubledMatrix& a, const DoubledMatrix& b) {
    if (a.half_cols() != b.half_rows()) throw ShapeError("DoubledMatrix product: inner dimensions differ");
    return {a.block1_ * b.block1_ + a.block2_ * b.block2_.conjugate(),
            a.block1_ * b.block2_ + a.block2_ * b.block1_.conjugate()};
  }

  friend DoubledMatrix operator+(const DoubledMatrix& a, const DoubledMatrix& b) {
    if (a.half_rows() != b.half_rows() || a.half_cols() != b.half_cols()) {
      throw ShapeError("DoubledMatrix sum: shapes differ");
    }
    return {a.block1_ + b.block1_, a.block2_ + b.block2_};
  }

  // Only real scalars commute with the conjugation in the lower blocks.
  friend DoubledMatrix operator*(double s, const DoubledMatrix& a) {
    return {s * a.block1_, s * a.block2_};
  }

 private:
  ComplexMatrix block1_;
  ComplexMatrix block2_;
};

inline DoubledMatrix delta_embed(const ComplexMatrix& a1, const ComplexMatrix& a2) {
  return DoubledMatrix(a1, a2);
}

/// Convenience for the scalar blocks that appear in one-mode devices.
inline ComplexMatrix delta_scalar(Complex a1, Complex a2) {
  ComplexMatrix m(2, 2);
  m << a1, a2, std::conj(a2), std::conj(a1);
  return m;
}

/// diag(I_n, -I_n).
class SignatureMatrix {
 public:
  explicit SignatureMatrix(Index half_dim) : half_dim_(half_dim) {
    if (half_dim < 0) throw ShapeError("SignatureMatrix: negative dimension");
  }

  Index half_dim() const noexcept { return half_dim_; }

  ComplexMatrix full() const {
    ComplexMatrix j = ComplexMatrix::Zero(2 * half_dim_, 2 * half_dim_);
    j.topLeftCorner(half_dim_, half_dim_).setIdentity();
    j.bottomRightCorner(half_dim_, half_dim_) = -ComplexMatrix::Identity(half_dim_, half_dim_);
    return j;
  }

 private:
  Index half_dim_;
};

inline ComplexMatrix signature(Index half_dim) { return SignatureMatrix(half_dim).full(); }

/// Half-widths of consecutive doubled blocks, e.g. the channels of a field
/// vector [A; A#; U; U#] have layout {m_A, m_U}.
using BlockLayout = std::vector<Index>;

inline Index total_half_width(const BlockLayout& layout) {
  return std::accumulate(layout.begin(), layout.end(), Index{0});
}

/// Block-diagonal signature over a per-block doubled layout.
inline ComplexMatrix block_signature(const BlockLayout& layout) {
  const Index dim = 2 * total_half_width(layout);
  ComplexMatrix j = ComplexMatrix::Zero(dim, dim);
  Index offset = 0;
  for (Index w : layout) {
    j.block(offset, offset, 2 * w, 2 * w) = signature(w);
    offset += 2 * w;
  }
  return j;
}

using Permutation = Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, Index>;

/// Permutation taking a per-block doubled vector [x1; x1#; x2; x2#; ...] to the
/// global form [x1; x2; ...; x1#; x2#; ...].
inline Permutation delta_permutation(const BlockLayout& layout) {
  const Index half = total_half_width(layout);
  Permutation perm(2 * half);
  Index local = 0;
  Index global = 0;
  for (Index w : layout) {
    for (Index k = 0; k < w; ++k) perm.indices()[local + k] = global + k;
    for (Index k = 0; k < w; ++k) perm.indices()[local + w + k] = half + global + k;
    local += 2 * w;
    global += w;
  }
  return perm;
}

/// Re-sorts a matrix written in per-block doubled order into global doubled
/// order, so that `is_delta_structured` applies to it.
inline ComplexMatrix to_global_delta(const ComplexMatrix& m, const BlockLayout& row_layout,
                                     const BlockLayout& col_layout) {
  if (m.rows() != 2 * total_half_width(row_layout) || m.cols() != 2 * total_half_width(col_layout)) {
    throw ShapeError("to_global_delta: layout does not match matrix shape");
  }
  const Permutation rows = delta_permutation(row_layout);
  const Permutation cols = delta_permutation(col_layout);
  return rows * m * cols.transpose();
}

struct Inertia {
  Index positive = 0;
  Index zero = 0;
  Index negative = 0;

  friend bool operator==(const Inertia&, const Inertia&) = default;
};

/// Eigenvalue sign counts of a Hermitian matrix; |lambda| < tol counts as zero.
inline Inertia inertia(const ComplexMatrix& m, double tol = kStructureTol) {
  if (!is_hermitian(m, tol)) throw StructureError("inertia: matrix is not Hermitian");
  Inertia out;
  if (m.size() == 0) return out;
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h, Eigen::EigenvaluesOnly);
  for (Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (std::abs(lambda) < tol) {
      ++out.zero;
    } else if (lambda > 0) {
      ++out.positive;
    } else {
      ++out.negative;
    }
  }
  return out;
}

}  // namespace cke
