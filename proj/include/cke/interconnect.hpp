#pragma once

// Closed loop of a plant (inputs A, U; output Y; cost row C) and a coherent
// controller (inputs Atilde, Y; outputs Ytilde, U):
//
//   F_a = [ F + G2 Kc2 H   G2 Hc ]     G_a = [ G1 + G2 Kc2 K   G2 Kc1 ]
//         [ Gc2 H          Fc    ]           [ Gc2 K           Gc1    ]
//
//   H_a = [ Kt2 H   Ht ]               K_a = [ Kt2 K   Kt1 ]
//
// State order is [plant doubled state; controller doubled state] and noise
// order is [A; Atilde], each subsystem keeping its own doubled halves.

#include <string>

#include "cke/doubled_algebra.hpp"
#include "cke/errors.hpp"
#include "cke/qsystem.hpp"
#include "cke/realizability.hpp"

namespace cke {

struct AugmentedSystem {
  ComplexMatrix F_a;
  ComplexMatrix G_a;
  ComplexMatrix H_a;
  ComplexMatrix K_a;
  ComplexMatrix C_a;  // [C 0]

  Index plant_half_dim = 0;
  Index controller_half_dim = 0;
  /// Half-widths of the noise blocks feeding G_a / K_a, in column order.
  BlockLayout noise_layout;
  /// Half-width of the measured field.
  Index measured_half_width = 0;

  Index state_dim() const { return 2 * (plant_half_dim + controller_half_dim); }
  BlockLayout state_layout() const { return {plant_half_dim, controller_half_dim}; }
  Index noise_half_width() const { return total_half_width(noise_layout); }

  /// Matrices re-sorted into global doubled order (for structure checks).
  struct GlobalForm {
    ComplexMatrix F, G, H, K;
  };
  GlobalForm global_form() const {
    const BlockLayout out{measured_half_width};
    return {to_global_delta(F_a, state_layout(), state_layout()),
            to_global_delta(G_a, state_layout(), noise_layout),
            to_global_delta(H_a, out, state_layout()),
            to_global_delta(K_a, out, noise_layout)};
  }
};

namespace detail {

inline void require_plant_shape(const QuantumLinearSystem& plant) {
  if (!plant.has_input(channel::kVacuum)) throw InterconnectError("plant has no vacuum input 'A'");
  if (!plant.has_output(channel::kOutput)) throw InterconnectError("plant has no output 'Y'");
  if (!plant.C()) throw InterconnectError("plant has no cost row C");
  for (std::size_t i = 0; i < plant.input_count(); ++i) {
    const auto& name = plant.input(i).name;
    if (name != channel::kVacuum && name != channel::kControl) {
      throw InterconnectError("plant has unexpected input channel '" + name + "'");
    }
  }
  if (max_abs(plant.K(channel::kOutput, channel::kControl)) > kStructureTol) {
    throw InterconnectError("plant output Y must not feed through the control input U");
  }
}

inline ComplexMatrix hcat(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

inline ComplexMatrix stack2x2(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c,
                              const ComplexMatrix& d) {
  ComplexMatrix out(a.rows() + c.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.topRightCorner(b.rows(), b.cols()) = b;
  out.bottomLeftCorner(c.rows(), c.cols()) = c;
  out.bottomRightCorner(d.rows(), d.cols()) = d;
  return out;
}

}  // namespace detail

/// Wires `controller` around `plant`. The Ytilde output is the measured field.
///
/// A controller without a U output leaves the plant's control port open; that
/// port then receives vacuum, modelled as an extra controller vacuum block
/// routed straight to U (Kc1 = [0 I]) so the block formulas stay unchanged.
inline AugmentedSystem close_loop(const QuantumLinearSystem& plant, const CoherentController& controller,
                                  double tol = kStructureTol) {
  detail::require_plant_shape(plant);
  const QuantumLinearSystem& csys = controller.system();
  const Index m_y = plant.output_width(channel::kOutput);
  const Index m_u = plant.input_width(channel::kControl);
  if (csys.input_width(channel::kOutput) != m_y) {
    throw InterconnectError("controller input Y has half-width " +
                            std::to_string(csys.input_width(channel::kOutput)) + ", plant output Y has " +
                            std::to_string(m_y));
  }
  const Index c_u = csys.output_width(channel::kControl);
  if (c_u != 0 && c_u != m_u) {
    throw InterconnectError("controller output U has half-width " + std::to_string(c_u) +
                            ", plant input U has " + std::to_string(m_u));
  }
  if (const auto check = check_controller_realizability(controller, tol); !check.ok()) {
    throw InterconnectError("controller is not physically realizable: " + check.failure().message());
  }

  const ComplexMatrix& F = plant.F();
  const ComplexMatrix G1 = plant.G(channel::kVacuum);
  const ComplexMatrix G2 = plant.G(channel::kControl);
  const ComplexMatrix H = plant.H(channel::kOutput);
  const ComplexMatrix K = plant.K(channel::kOutput, channel::kVacuum);

  const ComplexMatrix& Fc = controller.F_c();
  ComplexMatrix Gc1 = controller.G_c1();
  const ComplexMatrix Gc2 = controller.G_c2();
  const ComplexMatrix Ht = controller.H_tilde();
  ComplexMatrix Kt1 = controller.K_tilde1();
  const ComplexMatrix Kt2 = controller.K_tilde2();
  ComplexMatrix Hc = controller.H_c();
  ComplexMatrix Kc1 = controller.K_c1();
  ComplexMatrix Kc2 = controller.K_c2();

  const Index nc2 = 2 * controller.n_c();
  const Index mt = csys.input_width(channel::kControllerVacuum);
  BlockLayout noise_layout{plant.input_width(channel::kVacuum), mt};

  if (c_u == 0 && m_u > 0) {
    const Index pad = 2 * m_u;
    Gc1 = detail::hcat(Gc1, ComplexMatrix::Zero(nc2, pad));
    Kt1 = detail::hcat(Kt1, ComplexMatrix::Zero(Kt1.rows(), pad));
    Hc = ComplexMatrix::Zero(pad, nc2);
    Kc1 = detail::hcat(ComplexMatrix::Zero(pad, 2 * mt), ComplexMatrix::Identity(pad, pad));
    Kc2 = ComplexMatrix::Zero(pad, 2 * m_y);
    noise_layout.push_back(m_u);
  }

  AugmentedSystem aug;
  aug.F_a = detail::stack2x2(F + G2 * Kc2 * H, G2 * Hc, Gc2 * H, Fc);
  aug.G_a = detail::stack2x2(G1 + G2 * Kc2 * K, G2 * Kc1, Gc2 * K, Gc1);
  aug.H_a = detail::hcat(Kt2 * H, Ht);
  aug.K_a = detail::hcat(Kt2 * K, Kt1);
  aug.C_a = detail::hcat(*plant.C(), ComplexMatrix::Zero(1, nc2));
  aug.plant_half_dim = plant.n();
  aug.controller_half_dim = controller.n_c();
  aug.noise_layout = std::move(noise_layout);
  aug.measured_half_width = csys.output_width(channel::kEstimation);
  return aug;
}

/// Baseline without a coherent controller: the control input is just another
/// vacuum field and Y is measured directly.
inline AugmentedSystem classical_only(const QuantumLinearSystem& plant) {
  detail::require_plant_shape(plant);
  const Index m_u = plant.input_width(channel::kControl);
  const ComplexMatrix K = plant.K(channel::kOutput, channel::kVacuum);

  AugmentedSystem aug;
  aug.F_a = plant.F();
  aug.G_a = detail::hcat(plant.G(channel::kVacuum), plant.G(channel::kControl));
  aug.H_a = plant.H(channel::kOutput);
  aug.K_a = detail::hcat(K, ComplexMatrix::Zero(K.rows(), 2 * m_u));
  aug.C_a = *plant.C();
  aug.plant_half_dim = plant.n();
  aug.controller_half_dim = 0;
  aug.noise_layout = {plant.input_width(channel::kVacuum)};
  if (m_u > 0) aug.noise_layout.push_back(m_u);
  aug.measured_half_width = plant.output_width(channel::kOutput);
  return aug;
}

}  // namespace cke
