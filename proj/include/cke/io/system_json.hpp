#pragma once

// System description files.
//
// Raw form:
//   {
//     "n": 1,
//     "F": <matrix>,
//     "inputs":  [{"name": "A", "half_width": 1, "G": <matrix>}, ...],
//     "outputs": [{"name": "Y", "half_width": 1, "H": <matrix>, "K": {"A": <matrix>}}, ...],
//     "C": <matrix>                       (optional, 1 x 2n)
//   }
// Omitted G / H / K blocks are zero. Builder shorthand:
//   {"cavity":        {"kappa1": 0.5, "kappa2": 0.5, "chi": 0}}
//   {"squeezer":      {"kappa1": 5, "kappa2": 5, "chi": [-0.5, 0]}}
//   {"beam_splitter": {"theta_mix_deg": 45}}
// As a plant, "cavity" and "squeezer" both build the cavity plant (chi is the
// squeezing parameter). As a controller they build the squeezer controller.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cke/interconnect.hpp"
#include "cke/io/matrix_json.hpp"
#include "cke/qsystem.hpp"
#include "cke/realizability.hpp"

namespace cke::io {

namespace detail {

inline const Json& require(const Json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(what + ": missing \"" + key + "\"");
  return j.at(key);
}

inline double require_number(const Json& j, const char* key, const std::string& what) {
  const Json& v = require(j, key, what);
  if (!v.is_number()) throw ConfigError(what + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

inline ComplexMatrix block_or_zero(const Json& parent, const char* key, Index rows, Index cols,
                                   const std::string& what) {
  if (!parent.contains(key)) return ComplexMatrix::Zero(rows, cols);
  ComplexMatrix m = parse_matrix(parent.at(key), what);
  if (m.size() == 0 && (rows == 0 || cols == 0)) return ComplexMatrix::Zero(rows, cols);
  return m;
}

inline Index require_width(const Json& j, const char* key, const std::string& what) {
  const Json& v = require(j, key, what);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(what + ": \"" + key + "\" must be a non-negative integer");
  }
  return static_cast<Index>(v.get<long long>());
}

struct DeviceParams {
  double kappa1;
  double kappa2;
  Complex chi;
};

inline DeviceParams device_params(const Json& j, const std::string& what) {
  DeviceParams p{require_number(j, "kappa1", what), require_number(j, "kappa2", what), 0.0};
  if (j.contains("chi")) p.chi = parse_complex(j.at("chi"), what + ".chi");
  return p;
}

// Wraps builder argument errors as configuration errors.
template <typename F>
auto build(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(what + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace detail

inline QuantumLinearSystem parse_raw_system(const Json& j, const std::string& what = "system") {
  const Index n = detail::require_width(j, "n", what);
  const Index dim = 2 * n;
  ComplexMatrix F = detail::block_or_zero(j, "F", dim, dim, what + ".F");

  std::vector<InputChannel> inputs;
  if (j.contains("inputs")) {
    for (const Json& in : j.at("inputs")) {
      const std::string name = detail::require(in, "name", what + ".inputs").get<std::string>();
      const std::string where = what + ".inputs[" + name + "]";
      const Index w = detail::require_width(in, "half_width", where);
      inputs.push_back({name, w, detail::block_or_zero(in, "G", dim, 2 * w, where + ".G")});
    }
  }

  std::vector<OutputChannel> outputs;
  if (j.contains("outputs")) {
    for (const Json& out : j.at("outputs")) {
      const std::string name = detail::require(out, "name", what + ".outputs").get<std::string>();
      const std::string where = what + ".outputs[" + name + "]";
      const Index w = detail::require_width(out, "half_width", where);
      OutputChannel oc{name, w, detail::block_or_zero(out, "H", 2 * w, dim, where + ".H"), {}};
      if (out.contains("K")) {
        const Json& ks = out.at("K");
        if (!ks.is_object()) throw ConfigError(where + ".K must map input names to matrices");
        for (const auto& [input, literal] : ks.items()) {
          const auto it = std::find_if(inputs.begin(), inputs.end(), [&](const auto& c) { return c.name == input; });
          if (it == inputs.end()) throw ConfigError(where + ".K references unknown input '" + input + "'");
          Json holder{{"K", literal}};
          oc.K.push_back({input, detail::block_or_zero(holder, "K", 2 * w, 2 * it->half_width, where + ".K")});
        }
      }
      outputs.push_back(std::move(oc));
    }
  }

  std::optional<ComplexMatrix> C;
  if (j.contains("C")) C = parse_matrix(j.at("C"), what + ".C");

  return detail::build(what, [&] {
    return QuantumLinearSystem(n, std::move(F), std::move(inputs), std::move(outputs), std::move(C));
  });
}

inline QuantumLinearSystem parse_plant(const Json& j, const std::string& what = "plant") {
  for (const char* key : {"cavity", "squeezer"}) {
    if (j.is_object() && j.contains(key)) {
      const auto p = detail::device_params(j.at(key), what + "." + key);
      return detail::build(what, [&] { return build_cavity_plant(p.kappa1, p.kappa2, p.chi); });
    }
  }
  return parse_raw_system(j, what);
}

inline double beam_splitter_angle(const Json& j, const std::string& what) {
  if (j.contains("theta_mix_deg")) {
    return detail::require_number(j, "theta_mix_deg", what) * std::numbers::pi / 180.0;
  }
  return detail::require_number(j, "theta_mix", what);
}

inline CoherentController parse_controller(const Json& j, const std::string& what = "controller") {
  for (const char* key : {"squeezer", "cavity"}) {
    if (j.is_object() && j.contains(key)) {
      const auto p = detail::device_params(j.at(key), what + "." + key);
      return detail::build(what, [&] { return build_squeezer_controller(p.kappa1, p.kappa2, p.chi); });
    }
  }
  if (j.is_object() && j.contains("beam_splitter")) {
    const double theta = beam_splitter_angle(j.at("beam_splitter"), what + ".beam_splitter");
    return build_beam_splitter_controller(theta);
  }
  const Json& raw = (j.is_object() && j.contains("raw")) ? j.at("raw") : j;
  QuantumLinearSystem sys = parse_raw_system(raw, what);
  return detail::build(what, [&] { return CoherentController(std::move(sys)); });
}

/// A file handed to `realizable`: controllers (builder shorthand or a raw
/// system with controller channels) are checked with scattering support.
struct ParsedSystem {
  QuantumLinearSystem system;
  std::optional<CoherentController> controller;
};

inline ParsedSystem parse_any_system(const Json& j) {
  if (j.is_object() && (j.contains("squeezer") || j.contains("beam_splitter"))) {
    CoherentController c = parse_controller(j);
    return {c.system(), c};
  }
  if (j.is_object() && j.contains("cavity")) return {parse_plant(j), std::nullopt};
  QuantumLinearSystem sys = parse_raw_system(j);
  if (sys.has_input(channel::kOutput) && sys.has_output(channel::kEstimation)) {
    try {
      CoherentController c(sys);
      return {sys, c};
    } catch (const Error&) {
      // Not a controller after all; fall through to the plain check.
    }
  }
  return {sys, std::nullopt};
}

inline Json system_to_json(const QuantumLinearSystem& sys) {
  Json j;
  j["n"] = sys.n();
  j["F"] = matrix_to_json(sys.F());
  j["inputs"] = Json::array();
  for (std::size_t i = 0; i < sys.input_count(); ++i) {
    const auto& in = sys.input(i);
    j["inputs"].push_back({{"name", in.name}, {"half_width", in.half_width}, {"G", matrix_to_json(in.G)}});
  }
  j["outputs"] = Json::array();
  for (std::size_t k = 0; k < sys.output_count(); ++k) {
    const std::string& name = sys.output_name(k);
    Json ks = Json::object();
    for (std::size_t i = 0; i < sys.input_count(); ++i) {
      ks[sys.input(i).name] = matrix_to_json(sys.K(name, sys.input(i).name));
    }
    j["outputs"].push_back({{"name", name},
                            {"half_width", sys.output_half_width(k)},
                            {"H", matrix_to_json(sys.H(name))},
                            {"K", std::move(ks)}});
  }
  if (sys.C()) j["C"] = matrix_to_json(*sys.C());
  return j;
}

inline Json realization_to_json(const PhysicalRealization& r) {
  Json j;
  j["Theta"] = matrix_to_json(r.theta);
  j["M"] = matrix_to_json(r.M);
  j["N"] = matrix_to_json(r.N);
  j["padded_outputs"] = r.padded_rows();
  j["residuals"] = {{"dynamics", r.residuals.dynamics},
                    {"input", r.residuals.input},
                    {"output", r.residuals.output},
                    {"feedthrough", r.residuals.feedthrough}};
  return j;
}

inline Json augmented_to_json(const AugmentedSystem& aug) {
  Json j;
  j["F_a"] = matrix_to_json(aug.F_a);
  j["G_a"] = matrix_to_json(aug.G_a);
  j["H_a"] = matrix_to_json(aug.H_a);
  j["K_a"] = matrix_to_json(aug.K_a);
  j["C_a"] = matrix_to_json(aug.C_a);
  j["plant_half_dim"] = aug.plant_half_dim;
  j["controller_half_dim"] = aug.controller_half_dim;
  j["noise_layout"] = aug.noise_layout;
  j["measured_half_width"] = aug.measured_half_width;
  return j;
}

}  // namespace cke::io
