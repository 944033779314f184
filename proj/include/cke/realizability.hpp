#pragma once

// Physical realizability of linear quantum systems.
//
// A system (F, G, H, K) is physically realizable when there are a Hermitian
// commutation matrix Theta with the inertia of J, a Hermitian doubled-up
// Hamiltonian matrix M and a doubled-up coupling matrix N such that
//
//   F = -i Theta M - 1/2 Theta N^dagger J N,   G = -Theta N^dagger J,
//   H = N,                                      K = I.
//
// The checker does not ask for Theta. It solves the Lyapunov-type identity
// F Theta + Theta F^dagger + G J G^dagger = 0 (a consequence of the relations
// above) for a Hermitian Theta, then recovers M and N and measures the defect
// of every relation.

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cke/doubled_algebra.hpp"
#include "cke/errors.hpp"
#include "cke/qsystem.hpp"

namespace cke {

enum class RealizabilityClause {
  KNotIdentity,         // direct feedthrough must be the identity
  NoCommutationMatrix,  // no unique Hermitian Theta solves the Lyapunov identity
  WrongInertia,         // Theta is not congruent to J
  CouplingMismatch,     // G != -Theta H^dagger J
  MNotHermitian,        // recovered Hamiltonian is not Hermitian / doubled-up
};

inline std::string_view to_string(RealizabilityClause clause) {
  switch (clause) {
    case RealizabilityClause::KNotIdentity: return "KNotIdentity";
    case RealizabilityClause::NoCommutationMatrix: return "NoCommutationMatrix";
    case RealizabilityClause::WrongInertia: return "WrongInertia";
    case RealizabilityClause::CouplingMismatch: return "CouplingMismatch";
    case RealizabilityClause::MNotHermitian: return "MNotHermitian";
  }
  return "Unknown";
}

inline std::string_view describe(RealizabilityClause clause) {
  switch (clause) {
    case RealizabilityClause::KNotIdentity:
      return "feedthrough K is not the identity (up to unused outputs and reordering)";
    case RealizabilityClause::NoCommutationMatrix:
      return "no unique Hermitian commutation matrix Theta satisfies F Theta + Theta F^dagger + G J G^dagger = 0";
    case RealizabilityClause::WrongInertia:
      return "commutation matrix Theta is not of the form T J T^dagger with T non-singular";
    case RealizabilityClause::CouplingMismatch:
      return "input matrix G differs from -Theta H^dagger J";
    case RealizabilityClause::MNotHermitian:
      return "recovered Hamiltonian matrix M is not Hermitian and doubled-up";
  }
  return "unknown clause";
}

struct NotRealizable {
  RealizabilityClause clause;
  std::string detail;

  std::string message() const {
    std::string msg = std::string(to_string(clause)) + ": " + std::string(describe(clause));
    if (!detail.empty()) msg += " (" + detail + ")";
    return msg;
  }
};

/// Max-abs defects of the four realizability relations.
struct RealizationResiduals {
  double dynamics = 0.0;     // F + i Theta M + 1/2 Theta N^dagger J N
  double input = 0.0;        // G + Theta N^dagger J
  double output = 0.0;       // H - N on the physical output rows
  double feedthrough = 0.0;  // K - I after reordering

  double max() const { return std::max(std::max(dynamics, input), std::max(output, feedthrough)); }
};

struct PhysicalRealization {
  ComplexMatrix theta;
  ComplexMatrix M;
  /// Coupling matrix; rows follow the input field layout. Rows that no
  /// physical output carries are synthetic unused outputs.
  ComplexMatrix N;
  BlockLayout field_layout;
  /// For each row of N, the row of H_all it reproduces, or -1 when padded.
  std::vector<Index> source_row;
  RealizationResiduals residuals;

  Index padded_rows() const {
    return static_cast<Index>(std::count(source_row.begin(), source_row.end(), Index{-1}));
  }
};

class RealizabilityResult {
 public:
  RealizabilityResult(PhysicalRealization r) : value_(std::move(r)) {}  // NOLINT
  RealizabilityResult(NotRealizable f) : value_(std::move(f)) {}        // NOLINT

  bool ok() const noexcept { return std::holds_alternative<PhysicalRealization>(value_); }
  explicit operator bool() const noexcept { return ok(); }

  const PhysicalRealization& realization() const {
    if (!ok()) throw StructureError("system is not realizable: " + failure().message());
    return std::get<PhysicalRealization>(value_);
  }
  const NotRealizable& failure() const { return std::get<NotRealizable>(value_); }

 private:
  std::variant<PhysicalRealization, NotRealizable> value_;
};

namespace detail {

// Real coordinates of a d x d Hermitian matrix: the diagonal, then the real
// and imaginary parts of each strictly upper entry.
inline ComplexMatrix hermitian_from_params(const Eigen::VectorXd& x, Index d) {
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  Index k = 0;
  for (Index i = 0; i < d; ++i) h(i, i) = x(k++);
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j) {
      const Complex v(x(k), x(k + 1));
      k += 2;
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  }
  return h;
}

inline void append_real(Eigen::VectorXd& out, Index& pos, const ComplexMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      out(pos++) = m(i, j).real();
      out(pos++) = m(i, j).imag();
    }
  }
}

struct CommutationSolve {
  ComplexMatrix theta;
  bool unique = false;
};

// Solves F X + X F^dagger = lyap_rhs together with X coupling = coupling_rhs
// (when `with_coupling`) for Hermitian X in the least-squares sense.
inline CommutationSolve solve_commutation(const ComplexMatrix& F, const ComplexMatrix& lyap_rhs,
                                          const ComplexMatrix& coupling,
                                          const ComplexMatrix& coupling_rhs, bool with_coupling) {
  const Index d = F.rows();
  const Index params = d * d;
  const Index eqs = 2 * d * d + (with_coupling ? 2 * d * coupling.cols() : 0);
  Eigen::MatrixXd A(eqs, params);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(params);
  for (Index k = 0; k < params; ++k) {
    x.setZero();
    x(k) = 1.0;
    const ComplexMatrix X = hermitian_from_params(x, d);
    Eigen::VectorXd col(eqs);
    Index pos = 0;
    append_real(col, pos, F * X + X * F.adjoint());
    if (with_coupling) append_real(col, pos, X * coupling);
    A.col(k) = col;
  }
  Eigen::VectorXd b(eqs);
  Index pos = 0;
  append_real(b, pos, lyap_rhs);
  if (with_coupling) append_real(b, pos, coupling_rhs);

  CommutationSolve out;
  if (params == 0) {
    out.unique = true;
    out.theta = ComplexMatrix(0, 0);
    return out;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  out.unique = qr.rank() == params;
  out.theta = hermitian_from_params(qr.solve(b), d);
  return out;
}

}  // namespace detail

/// Decides whether `sys` is physically realizable. Outputs whose feedthrough
/// rows select distinct inputs are reordered to make K = I, and inputs that no
/// output carries get synthetic unused outputs before the test.
inline RealizabilityResult check_physical_realizability(const QuantumLinearSystem& sys,
                                                       double tol = kStructureTol) {
  const Index d = 2 * sys.n();
  const ComplexMatrix& F = sys.F();
  const ComplexMatrix G = sys.G_all();
  const ComplexMatrix H = sys.H_all();
  const ComplexMatrix K = sys.K_all();
  const BlockLayout in_layout = sys.input_layout();
  const ComplexMatrix J_in = block_signature(in_layout);
  const ComplexMatrix J_out = block_signature(sys.output_layout());
  const Index fields = G.cols();

  // Each output row must copy exactly one input column with the same
  // annihilation/creation role.
  std::vector<Index> row_of_column(static_cast<std::size_t>(fields), -1);
  for (Index r = 0; r < K.rows(); ++r) {
    Index hit = -1;
    for (Index c = 0; c < fields; ++c) {
      const double a = std::abs(K(r, c));
      if (std::abs(K(r, c) - Complex(1.0)) <= tol) {
        hit = (hit == -1) ? c : -2;
      } else if (a > tol) {
        return NotRealizable{RealizabilityClause::KNotIdentity,
                             "row " + std::to_string(r) + " has entry " + std::to_string(a) +
                                 " outside the identity pattern"};
      }
    }
    if (hit < 0) {
      return NotRealizable{RealizabilityClause::KNotIdentity,
                           "row " + std::to_string(r) + " does not select a single input"};
    }
    if (row_of_column[hit] != -1) {
      return NotRealizable{RealizabilityClause::KNotIdentity,
                           "input column " + std::to_string(hit) + " appears in two outputs"};
    }
    if (J_out(r, r) != J_in(hit, hit)) {
      return NotRealizable{RealizabilityClause::KNotIdentity,
                           "row " + std::to_string(r) + " maps a creation field onto an annihilation field"};
    }
    row_of_column[hit] = r;
  }

  const double scale = 1.0 + max_abs(F) + max_abs(G) * max_abs(G) + max_abs(H) * max_abs(H);
  const double lim = tol * scale;

  // Coupling constraint on the physical rows: Theta (H_r^dagger J_in(c)) = -G_c.
  std::vector<Index> matched;
  for (Index c = 0; c < fields; ++c) {
    if (row_of_column[c] >= 0) matched.push_back(c);
  }
  ComplexMatrix coupling(d, static_cast<Index>(matched.size()));
  ComplexMatrix coupling_rhs(d, static_cast<Index>(matched.size()));
  for (std::size_t k = 0; k < matched.size(); ++k) {
    const Index c = matched[k];
    coupling.col(static_cast<Index>(k)) = H.row(row_of_column[c]).adjoint() * J_in(c, c);
    coupling_rhs.col(static_cast<Index>(k)) = -G.col(c);
  }
  const ComplexMatrix lyap_rhs = -G * J_in * G.adjoint();

  auto solve = detail::solve_commutation(F, lyap_rhs, coupling, coupling_rhs, false);
  if (!solve.unique) {
    solve = detail::solve_commutation(F, lyap_rhs, coupling, coupling_rhs, true);
    if (!solve.unique) {
      return NotRealizable{RealizabilityClause::NoCommutationMatrix,
                           "Lyapunov operator is singular and the coupling relation does not pin Theta down"};
    }
  }
  const ComplexMatrix theta = 0.5 * (solve.theta + solve.theta.adjoint());
  const double lyap_defect = max_abs(F * theta + theta * F.adjoint() + G * J_in * G.adjoint());
  if (lyap_defect > lim) {
    return NotRealizable{RealizabilityClause::NoCommutationMatrix,
                         "Lyapunov defect " + std::to_string(lyap_defect)};
  }

  const Inertia expected{sys.n(), 0, sys.n()};
  const Inertia got = inertia(theta, tol);
  if (!(got == expected)) {
    return NotRealizable{RealizabilityClause::WrongInertia,
                         "inertia (" + std::to_string(got.positive) + "," + std::to_string(got.zero) + "," +
                             std::to_string(got.negative) + ")"};
  }

  const double coupling_defect = max_abs(theta * coupling - coupling_rhs);
  if (coupling_defect > lim) {
    return NotRealizable{RealizabilityClause::CouplingMismatch,
                         "defect " + std::to_string(coupling_defect)};
  }

  const ComplexMatrix theta_inv =
      d == 0 ? ComplexMatrix(0, 0) : ComplexMatrix(theta.partialPivLu().inverse());
  ComplexMatrix N(fields, d);
  std::vector<Index> source(static_cast<std::size_t>(fields), -1);
  for (Index c = 0; c < fields; ++c) {
    if (row_of_column[c] >= 0) {
      N.row(c) = H.row(row_of_column[c]);
      source[c] = row_of_column[c];
    } else {
      N.row(c) = -J_in(c, c) * G.col(c).adjoint() * theta_inv;
    }
  }

  const Complex i(0.0, 1.0);
  ComplexMatrix M = i * theta_inv * F + (i / 2.0) * N.adjoint() * J_in * N;
  const double herm_defect = max_abs(M - M.adjoint());
  if (herm_defect > lim || !is_delta_structured(M, lim)) {
    return NotRealizable{RealizabilityClause::MNotHermitian,
                         "Hermitian defect " + std::to_string(herm_defect)};
  }
  M = 0.5 * (M + M.adjoint());

  PhysicalRealization out;
  out.residuals.dynamics = max_abs(F + i * theta * M + 0.5 * theta * N.adjoint() * J_in * N);
  out.residuals.input = max_abs(G + theta * N.adjoint() * J_in);
  double out_defect = 0.0;
  double k_defect = 0.0;
  for (Index c = 0; c < fields; ++c) {
    const Index r = row_of_column[c];
    if (r < 0) continue;
    out_defect = std::max(out_defect, max_abs(H.row(r) - N.row(c)));
    ComplexMatrix unit = ComplexMatrix::Zero(1, fields);
    unit(0, c) = 1.0;
    k_defect = std::max(k_defect, max_abs(K.row(r) - unit));
  }
  out.residuals.output = out_defect;
  out.residuals.feedthrough = k_defect;
  out.theta = theta;
  out.M = std::move(M);
  out.N = std::move(N);
  out.field_layout = in_layout;
  out.source_row = std::move(source);
  return out;
}

/// Realizability of a coherent controller. On top of the plain check, a
/// controller whose feedthrough is a unitary scattering matrix S that
/// preserves the field signature (static optics such as beam splitters) is
/// tested as the equivalent system with outputs S^dagger y, whose feedthrough
/// is the identity.
inline RealizabilityResult check_controller_realizability(const CoherentController& controller,
                                                         double tol = kStructureTol) {
  const QuantumLinearSystem& sys = controller.system();
  RealizabilityResult strict = check_physical_realizability(sys, tol);
  if (strict.ok() || strict.failure().clause != RealizabilityClause::KNotIdentity) return strict;

  const ComplexMatrix K = sys.K_all();
  if (K.rows() != K.cols()) return strict;
  const ComplexMatrix J_in = block_signature(sys.input_layout());
  const ComplexMatrix J_out = block_signature(sys.output_layout());
  const ComplexMatrix I = ComplexMatrix::Identity(K.rows(), K.cols());
  if (max_abs(K * K.adjoint() - I) > tol || max_abs(K * J_in * K.adjoint() - J_out) > tol) return strict;

  const ComplexMatrix H_rot = K.adjoint() * sys.H_all();
  std::vector<OutputChannel> outputs;
  Index row = 0;
  for (std::size_t k = 0; k < sys.input_count(); ++k) {
    const auto& in = sys.input(k);
    outputs.push_back({in.name + "_scattered", in.half_width, H_rot.middleRows(row, 2 * in.half_width),
                       {{in.name, ComplexMatrix::Identity(2 * in.half_width, 2 * in.half_width)}}});
    row += 2 * in.half_width;
  }
  const QuantumLinearSystem unscattered(sys.n(), sys.F(), sys.input_channels(), std::move(outputs));
  return check_physical_realizability(unscattered, tol);
}

/// Builds the system (F, G, H, K) generated by (Theta, M, N), with a single
/// input channel "in" and output channel "out" of half-width N.rows()/2.
inline QuantumLinearSystem realize(const ComplexMatrix& theta, const ComplexMatrix& m,
                                   const ComplexMatrix& n_mat, double tol = kStructureTol) {
  const Index d = theta.rows();
  if (theta.cols() != d || d % 2 != 0) throw ShapeError("realize: Theta must be square of even size");
  if (m.rows() != d || m.cols() != d) throw ShapeError("realize: M must match Theta");
  if (n_mat.cols() != d || n_mat.rows() % 2 != 0) throw ShapeError("realize: N must be 2m x 2n");
  require_finite(theta, "Theta");
  require_finite(m, "M");
  require_finite(n_mat, "N");
  const Index n = d / 2;
  if (!(inertia(theta, tol) == Inertia{n, 0, n})) {
    throw StructureError("realize: Theta does not have the inertia of J");
  }
  if (!is_hermitian(m, tol) || !is_delta_structured(m, tol)) {
    throw StructureError("realize: M must be Hermitian and doubled-up");
  }
  if (!is_delta_structured(n_mat, tol)) throw StructureError("realize: N must be doubled-up");

  const Index fields = n_mat.rows() / 2;
  const ComplexMatrix J = signature(fields);
  const Complex i(0.0, 1.0);
  ComplexMatrix F = -i * theta * m - 0.5 * theta * n_mat.adjoint() * J * n_mat;
  ComplexMatrix G = -theta * n_mat.adjoint() * J;
  return QuantumLinearSystem(
      n, std::move(F), {{"in", fields, std::move(G)}},
      {{"out", fields, n_mat, {{"in", ComplexMatrix::Identity(2 * fields, 2 * fields)}}}});
}

}  // namespace cke
