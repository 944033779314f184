#pragma once

// Scenario files drive angle sweeps:
//
//   {
//     "name": "squeezer",
//     "plant": {"cavity": {"kappa1": 0.5, "kappa2": 0.5, "chi": 0}},
//     "controller": {"squeezer": {"kappa1": 5, "kappa2": 5, "chi": [-0.5, 0]}},
//     "angles": {"start_deg": 0, "stop_deg": 180, "step_deg": 1},
//     "homodyne": {"offsets_deg": [0]},
//     "tolerance": 1e-10,
//     "noise_convention": "canonical",
//     "output": {"path": "squeezer.csv", "format": "csv"}
//   }
//
// "controller" is "none" (or absent) for classical-only estimation. The angle
// grid is half-open, [start, stop). Detector i measures at theta + offset_i;
// the default offsets are 0, 90, 180, ... degrees.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "cke/interconnect.hpp"
#include "cke/io/system_json.hpp"
#include "cke/synthesis.hpp"

namespace cke::experiments {

using io::Json;

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ConfigError("unknown output format '" + s + "' (expected csv or json)");
}

struct AngleGrid {
  double start_deg = 0.0;
  double stop_deg = 180.0;
  double step_deg = 1.0;

  void validate() const {
    if (!std::isfinite(start_deg) || !std::isfinite(stop_deg) || !std::isfinite(step_deg)) {
      throw ConfigError("angle grid must be finite");
    }
    if (!(step_deg > 0.0)) throw ConfigError("angle grid step must be positive");
    if (!(stop_deg > start_deg)) throw ConfigError("angle grid is empty (stop <= start)");
  }

  /// start + k*step for every k with start + k*step < stop.
  std::vector<double> values() const {
    validate();
    std::vector<double> out;
    for (long k = 0;; ++k) {
      const double theta = start_deg + static_cast<double>(k) * step_deg;
      if (theta >= stop_deg - 1e-9 * step_deg) break;
      out.push_back(theta);
    }
    return out;
  }
};

struct Scenario {
  std::string name;
  QuantumLinearSystem plant;
  std::optional<CoherentController> controller;
  AngleGrid grid;
  std::vector<double> offsets_deg;  // empty: defaults
  SynthesisOptions options;
  std::optional<std::string> output_path;
  OutputFormat format = OutputFormat::Csv;

  AugmentedSystem augmented() const {
    return controller ? close_loop(plant, *controller) : classical_only(plant);
  }

  /// Detector angles for sweep angle `theta_deg` on a field of `channels`.
  std::vector<double> detector_angles(double theta_deg, Index channels) const {
    std::vector<double> out;
    for (Index i = 0; i < channels; ++i) {
      const double offset = offsets_deg.empty() ? 90.0 * static_cast<double>(i)
                                                : offsets_deg[static_cast<std::size_t>(i)];
      out.push_back(theta_deg + offset);
    }
    return out;
  }
};

inline NoiseConvention parse_noise(const std::string& s) {
  if (s == "canonical") return NoiseConvention::Canonical;
  if (s == "symmetrized_vacuum") return NoiseConvention::SymmetrizedVacuum;
  throw ConfigError("unknown noise_convention '" + s + "'");
}

inline Scenario parse_scenario(const Json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  if (!j.contains("plant")) throw ConfigError("scenario: missing \"plant\"");

  std::optional<CoherentController> controller;
  if (j.contains("controller") && !(j.at("controller").is_string() && j.at("controller") == "none") &&
      !j.at("controller").is_null()) {
    controller = io::parse_controller(j.at("controller"));
  }

  Scenario s{j.value("name", std::string("scenario")), io::parse_plant(j.at("plant")), std::move(controller),
             AngleGrid{}, {}, SynthesisOptions{}, std::nullopt, OutputFormat::Csv};

  try {
    if (j.contains("angles")) {
      const Json& a = j.at("angles");
      s.grid.start_deg = a.value("start_deg", s.grid.start_deg);
      s.grid.stop_deg = a.value("stop_deg", s.grid.stop_deg);
      s.grid.step_deg = a.value("step_deg", s.grid.step_deg);
    }
    if (j.contains("homodyne") && j.at("homodyne").contains("offsets_deg")) {
      s.offsets_deg = j.at("homodyne").at("offsets_deg").get<std::vector<double>>();
    }
    s.options.tol = j.value("tolerance", s.options.tol);
    if (j.contains("noise_convention")) s.options.noise = parse_noise(j.at("noise_convention").get<std::string>());
    if (j.contains("output")) {
      const Json& o = j.at("output");
      if (o.contains("path")) s.output_path = o.at("path").get<std::string>();
      if (o.contains("format")) s.format = parse_format(o.at("format").get<std::string>());
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }

  s.grid.validate();
  if (!(s.options.tol > 0.0)) throw ConfigError("scenario: tolerance must be positive");

  // Wiring problems are configuration errors, caught before any solve.
  AugmentedSystem aug = [&] {
    try {
      return s.augmented();
    } catch (const InterconnectError& e) {
      throw ConfigError(std::string("scenario: ") + e.what());
    }
  }();
  if (!s.offsets_deg.empty() && static_cast<Index>(s.offsets_deg.size()) != aug.measured_half_width) {
    throw ConfigError("scenario: homodyne offsets_deg has " + std::to_string(s.offsets_deg.size()) +
                      " entries, measured field has " + std::to_string(aug.measured_half_width));
  }
  return s;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_json_file(path)); }

}  // namespace cke::experiments
