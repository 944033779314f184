#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "cke/experiments/scenario.hpp"
#include "cke/experiments/sweep.hpp"

namespace cke::experiments {

inline constexpr const char* kCsvHeader = "theta_deg,cost,gain_norm,residual,stabilizing,oracle_cost";

/// 12 significant digits, locale independent.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string to_csv(const SweepResult& result) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : result.rows) {
    out += format_number(r.theta_deg) + ',' + format_number(r.cost) + ',' + format_number(r.gain_norm) + ',' +
           format_number(r.residual) + ',' + (r.stabilizing ? "true" : "false") + ',' +
           format_number(r.oracle_cost) + '\n';
  }
  return out;
}

namespace detail {

// Rounds to 12 significant digits; the JSON writer then prints the shortest
// representation of the rounded value. Non-finite values become null.
inline Json rounded(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_number(v));
}

}  // namespace detail

inline std::string to_json_text(const SweepResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    Json row = {{"theta_deg", detail::rounded(r.theta_deg)},
                {"cost", detail::rounded(r.cost)},
                {"gain_norm", detail::rounded(r.gain_norm)},
                {"residual", detail::rounded(r.residual)},
                {"stabilizing", r.stabilizing},
                {"oracle_cost", detail::rounded(r.oracle_cost)}};
    if (!r.ok()) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  return rows.dump(2) + '\n';
}

inline std::string render(const SweepResult& result, OutputFormat format) {
  return format == OutputFormat::Csv ? to_csv(result) : to_json_text(result);
}

/// Writes the rendered result with LF line endings.
inline void emit(const SweepResult& result, OutputFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::string text = render(result, format);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write to " + path.string() + " failed");
}

}  // namespace cke::experiments
