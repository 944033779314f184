#pragma once

// Linear quantum systems in doubled-up form:
//
//   d[a; a#]   = F [a; a#] dt + sum_i G_i d[w_i; w_i#]
//   d[y_j; y_j#] = H_j [a; a#] dt + sum_i K_ji d[w_i; w_i#]
//   z          = C [a; a#]
//
// Inputs and outputs are named channels. Concatenated matrices (G_all, H_all,
// K_all) follow declaration order and keep each channel's doubled halves
// together, i.e. columns are [w_1; w_1#; w_2; w_2#; ...].

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cke/doubled_algebra.hpp"
#include "cke/errors.hpp"

namespace cke {

namespace channel {
inline constexpr std::string_view kVacuum = "A";
inline constexpr std::string_view kControl = "U";
inline constexpr std::string_view kOutput = "Y";
inline constexpr std::string_view kControllerVacuum = "Atilde";
inline constexpr std::string_view kEstimation = "Ytilde";
}  // namespace channel

struct InputChannel {
  std::string name;
  Index half_width = 0;
  ComplexMatrix G;  // 2n x 2*half_width
};

struct Feedthrough {
  std::string input;
  ComplexMatrix K;  // 2*out_width x 2*in_width
};

struct OutputChannel {
  std::string name;
  Index half_width = 0;
  ComplexMatrix H;               // 2*half_width x 2n
  std::vector<Feedthrough> K;    // unlisted inputs have zero feedthrough
};

class QuantumLinearSystem {
 public:
  QuantumLinearSystem(Index n, ComplexMatrix F, std::vector<InputChannel> inputs,
                      std::vector<OutputChannel> outputs,
                      std::optional<ComplexMatrix> C = std::nullopt)
      : n_(n), F_(std::move(F)), inputs_(std::move(inputs)), C_(std::move(C)) {
    if (n_ < 0) throw ShapeError("QuantumLinearSystem: negative state dimension");
    const Index dim = 2 * n_;
    check_block(F_, dim, dim, "F");

    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      const auto& in = inputs_[i];
      if (in.half_width < 0) throw ShapeError("input '" + in.name + "': negative width");
      for (std::size_t j = 0; j < i; ++j) {
        if (inputs_[j].name == in.name) throw ShapeError("duplicate input channel '" + in.name + "'");
      }
      check_block(in.G, dim, 2 * in.half_width, "G[" + in.name + "]");
    }

    for (auto& out : outputs) {
      if (out.half_width < 0) throw ShapeError("output '" + out.name + "': negative width");
      if (std::any_of(outputs_.begin(), outputs_.end(),
                      [&](const Stored& s) { return s.name == out.name; })) {
        throw ShapeError("duplicate output channel '" + out.name + "'");
      }
      check_block(out.H, 2 * out.half_width, dim, "H[" + out.name + "]");
      Stored stored{out.name, out.half_width, std::move(out.H), {}};
      for (const auto& in : inputs_) {
        stored.K.push_back(ComplexMatrix::Zero(2 * out.half_width, 2 * in.half_width));
      }
      for (auto& ft : out.K) {
        const std::size_t idx = input_index(ft.input);
        check_block(ft.K, 2 * out.half_width, 2 * inputs_[idx].half_width,
                    "K[" + out.name + "," + ft.input + "]");
        stored.K[idx] = std::move(ft.K);
      }
      outputs_.push_back(std::move(stored));
    }

    if (C_) {
      if (C_->rows() != 1 || C_->cols() != dim) {
        throw ShapeError("C must be 1x" + std::to_string(dim));
      }
      require_finite(*C_, "C");
    }
  }

  Index n() const noexcept { return n_; }
  const ComplexMatrix& F() const noexcept { return F_; }
  const std::optional<ComplexMatrix>& C() const noexcept { return C_; }

  std::size_t input_count() const noexcept { return inputs_.size(); }
  std::size_t output_count() const noexcept { return outputs_.size(); }
  const InputChannel& input(std::size_t i) const { return inputs_.at(i); }
  const std::string& output_name(std::size_t j) const { return outputs_.at(j).name; }
  Index output_half_width(std::size_t j) const { return outputs_.at(j).half_width; }

  bool has_input(std::string_view name) const {
    return std::any_of(inputs_.begin(), inputs_.end(), [&](const auto& c) { return c.name == name; });
  }
  bool has_output(std::string_view name) const {
    return std::any_of(outputs_.begin(), outputs_.end(), [&](const auto& c) { return c.name == name; });
  }

  /// Half-width of a channel, 0 when the channel is absent.
  Index input_width(std::string_view name) const {
    return has_input(name) ? inputs_[input_index(name)].half_width : 0;
  }
  Index output_width(std::string_view name) const {
    return has_output(name) ? outputs_[output_index(name)].half_width : 0;
  }

  // Block accessors return correctly sized zero blocks for absent channels so
  // that interconnection formulas degrade to empty contributions.
  ComplexMatrix G(std::string_view input) const {
    if (!has_input(input)) return ComplexMatrix::Zero(2 * n_, 0);
    return inputs_[input_index(input)].G;
  }
  ComplexMatrix H(std::string_view output) const {
    if (!has_output(output)) return ComplexMatrix::Zero(0, 2 * n_);
    return outputs_[output_index(output)].H;
  }
  ComplexMatrix K(std::string_view output, std::string_view input) const {
    const Index rows = 2 * output_width(output);
    const Index cols = 2 * input_width(input);
    if (!has_output(output) || !has_input(input)) return ComplexMatrix::Zero(rows, cols);
    return outputs_[output_index(output)].K[input_index(input)];
  }

  BlockLayout input_layout() const {
    BlockLayout layout;
    for (const auto& in : inputs_) layout.push_back(in.half_width);
    return layout;
  }
  BlockLayout output_layout() const {
    BlockLayout layout;
    for (const auto& out : outputs_) layout.push_back(out.half_width);
    return layout;
  }

  ComplexMatrix G_all() const {
    ComplexMatrix g(2 * n_, 2 * total_half_width(input_layout()));
    Index col = 0;
    for (const auto& in : inputs_) {
      g.middleCols(col, in.G.cols()) = in.G;
      col += in.G.cols();
    }
    return g;
  }

  ComplexMatrix H_all() const {
    ComplexMatrix h(2 * total_half_width(output_layout()), 2 * n_);
    Index row = 0;
    for (const auto& out : outputs_) {
      h.middleRows(row, out.H.rows()) = out.H;
      row += out.H.rows();
    }
    return h;
  }

  ComplexMatrix K_all() const {
    ComplexMatrix k(2 * total_half_width(output_layout()), 2 * total_half_width(input_layout()));
    Index row = 0;
    for (const auto& out : outputs_) {
      Index col = 0;
      for (const auto& block : out.K) {
        k.block(row, col, block.rows(), block.cols()) = block;
        col += block.cols();
      }
      row += 2 * out.half_width;
    }
    return k;
  }

  /// Rebuilds the constructor arguments, e.g. to derive a modified system.
  std::vector<InputChannel> input_channels() const { return inputs_; }
  std::vector<OutputChannel> output_channels() const {
    std::vector<OutputChannel> outs;
    for (const auto& s : outputs_) {
      OutputChannel o{s.name, s.half_width, s.H, {}};
      for (std::size_t i = 0; i < inputs_.size(); ++i) o.K.push_back({inputs_[i].name, s.K[i]});
      outs.push_back(std::move(o));
    }
    return outs;
  }

 private:
  struct Stored {
    std::string name;
    Index half_width;
    ComplexMatrix H;
    std::vector<ComplexMatrix> K;  // aligned with inputs_
  };

  std::size_t input_index(std::string_view name) const {
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      if (inputs_[i].name == name) return i;
    }
    throw ShapeError("unknown input channel '" + std::string(name) + "'");
  }
  std::size_t output_index(std::string_view name) const {
    for (std::size_t j = 0; j < outputs_.size(); ++j) {
      if (outputs_[j].name == name) return j;
    }
    throw ShapeError("unknown output channel '" + std::string(name) + "'");
  }

  static void check_block(const ComplexMatrix& m, Index rows, Index cols, const std::string& what) {
    if (m.rows() != rows || m.cols() != cols) {
      throw ShapeError(what + " has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                       ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    require_finite(m, what);
    if (!is_delta_structured(m, kStructureTol)) throw StructureError(what + " is not doubled-up");
  }

  Index n_;
  ComplexMatrix F_;
  std::vector<InputChannel> inputs_;
  std::vector<Stored> outputs_;
  std::optional<ComplexMatrix> C_;
};

/// A quantum system used as the coherent part of an estimator. Inputs are the
/// controller vacuum "Atilde" (optional) and the plant output "Y"; outputs are
/// the measured field "Ytilde" and, when coherent feedback is used, "U".
/// Additional outputs are allowed and treated as unused fields.
class CoherentController {
 public:
  explicit CoherentController(QuantumLinearSystem system) : system_(std::move(system)) {
    if (!system_.has_input(channel::kOutput)) {
      throw ShapeError("coherent controller needs an input channel 'Y'");
    }
    if (!system_.has_output(channel::kEstimation)) {
      throw ShapeError("coherent controller needs an output channel 'Ytilde'");
    }
    for (std::size_t i = 0; i < system_.input_count(); ++i) {
      const auto& name = system_.input(i).name;
      if (name != channel::kOutput && name != channel::kControllerVacuum) {
        throw ShapeError("coherent controller has unexpected input channel '" + name + "'");
      }
    }
  }

  const QuantumLinearSystem& system() const noexcept { return system_; }
  Index n_c() const noexcept { return system_.n(); }
  bool has_feedback() const { return system_.output_width(channel::kControl) > 0; }

  const ComplexMatrix& F_c() const { return system_.F(); }
  ComplexMatrix G_c1() const { return system_.G(channel::kControllerVacuum); }
  ComplexMatrix G_c2() const { return system_.G(channel::kOutput); }
  ComplexMatrix H_tilde() const { return system_.H(channel::kEstimation); }
  ComplexMatrix K_tilde1() const { return system_.K(channel::kEstimation, channel::kControllerVacuum); }
  ComplexMatrix K_tilde2() const { return system_.K(channel::kEstimation, channel::kOutput); }
  ComplexMatrix H_c() const { return system_.H(channel::kControl); }
  ComplexMatrix K_c1() const { return system_.K(channel::kControl, channel::kControllerVacuum); }
  ComplexMatrix K_c2() const { return system_.K(channel::kControl, channel::kOutput); }

 private:
  QuantumLinearSystem system_;
};

namespace detail {

inline void require_positive_rates(double kappa1, double kappa2) {
  if (!(kappa1 > 0.0) || !(kappa2 > 0.0)) {
    throw std::invalid_argument("coupling rates must be positive (kappa1=" + std::to_string(kappa1) +
                                ", kappa2=" + std::to_string(kappa2) + ")");
  }
}

// One-mode cavity with a degenerate parametric term:
// da = -(gamma/2) a dt - chi a* dt - sqrt(k1) dw1 - sqrt(k2) dw2.
inline ComplexMatrix squeezer_dynamics(double kappa1, double kappa2, Complex chi) {
  const double gamma = kappa1 + kappa2;
  return delta_scalar(-gamma / 2.0, -chi);
}

}  // namespace detail

/// Cavity (or dynamic squeezer, chi != 0) plant with vacuum input "A",
/// control input "U", measured output "Y" and the scaled momentum quadrature
/// z = (a - a*)/sqrt(2) as the estimated quantity.
inline QuantumLinearSystem build_cavity_plant(double kappa1, double kappa2, Complex chi) {
  detail::require_positive_rates(kappa1, kappa2);
  const double s1 = std::sqrt(kappa1);
  const double s2 = std::sqrt(kappa2);
  ComplexMatrix C(1, 2);
  C << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  return QuantumLinearSystem(
      1, detail::squeezer_dynamics(kappa1, kappa2, chi),
      {{std::string(channel::kVacuum), 1, delta_scalar(-s1, 0.0)},
       {std::string(channel::kControl), 1, delta_scalar(-s2, 0.0)}},
      {{std::string(channel::kOutput), 1, delta_scalar(s1, 0.0),
        {{std::string(channel::kVacuum), ComplexMatrix::Identity(2, 2)}}}},
      C);
}

/// The same one-mode device rewired as a coherent controller: "Atilde" drives
/// the kappa1 mirror and leaves as "Ytilde"; the plant output "Y" enters
/// through the kappa2 mirror and leaves as the feedback field "U".
inline CoherentController build_squeezer_controller(double kappa1, double kappa2, Complex chi) {
  detail::require_positive_rates(kappa1, kappa2);
  const double s1 = std::sqrt(kappa1);
  const double s2 = std::sqrt(kappa2);
  const ComplexMatrix I = ComplexMatrix::Identity(2, 2);
  return CoherentController(QuantumLinearSystem(
      1, detail::squeezer_dynamics(kappa1, kappa2, chi),
      {{std::string(channel::kControllerVacuum), 1, delta_scalar(-s1, 0.0)},
       {std::string(channel::kOutput), 1, delta_scalar(-s2, 0.0)}},
      {{std::string(channel::kEstimation), 1, delta_scalar(s1, 0.0),
        {{std::string(channel::kControllerVacuum), I}}},
       {std::string(channel::kControl), 1, delta_scalar(s2, 0.0),
        {{std::string(channel::kOutput), I}}}}));
}

/// Half-level scattering matrix of the beam splitter, columns ordered (Y, Atilde):
///   Ytilde_1 =  cos(t) Y + sin(t) Atilde
///   Ytilde_2 = -sin(t) Y + cos(t) Atilde
inline ComplexMatrix beam_splitter_scattering(double theta_mix) {
  const double c = std::cos(theta_mix);
  const double s = std::sin(theta_mix);
  ComplexMatrix S(2, 2);
  S << c, s, -s, c;
  return S;
}

/// Static beam splitter mixing the plant output with a vacuum field. No state
/// and no feedback path; both outputs form the two-wide "Ytilde" channel.
inline CoherentController build_beam_splitter_controller(double theta_mix) {
  const ComplexMatrix S = beam_splitter_scattering(theta_mix);
  const ComplexMatrix zero = ComplexMatrix::Zero(2, 1);
  return CoherentController(QuantumLinearSystem(
      0, ComplexMatrix::Zero(0, 0),
      {{std::string(channel::kControllerVacuum), 1, ComplexMatrix::Zero(0, 2)},
       {std::string(channel::kOutput), 1, ComplexMatrix::Zero(0, 2)}},
      {{std::string(channel::kEstimation), 2, ComplexMatrix::Zero(4, 0),
        {{std::string(channel::kControllerVacuum), delta_embed(S.col(1), zero).full()},
         {std::string(channel::kOutput), delta_embed(S.col(0), zero).full()}}}}));
}

}  // namespace cke
