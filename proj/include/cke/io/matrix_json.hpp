#pragma once

// Matrix literals: a JSON array of rows, each row an array of [re, im] pairs.
// A bare number is accepted as a real entry.
//
//   [[[0.5, 0], [0, -1]],
//    [[0, 1],   [0.5, 0]]]

#include <string>

#include <json.hpp>

#include "cke/doubled_algebra.hpp"
#include "cke/errors.hpp"

namespace cke::io {

using Json = nlohmann::json;

inline Complex parse_complex(const Json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw ConfigError(what + ": expected a number or a [re, im] pair, got " + j.dump());
}

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline ComplexMatrix parse_matrix(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": matrix literal must be an array of rows");
  const auto rows = static_cast<Index>(j.size());
  if (rows == 0) return ComplexMatrix(0, 0);
  if (!j[0].is_array()) throw ConfigError(what + ": matrix rows must be arrays");
  const auto cols = static_cast<Index>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ConfigError(what + ": row " + std::to_string(r) + " has the wrong length");
    }
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = parse_complex(row[static_cast<std::size_t>(c)],
                              what + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  if (!m.allFinite()) throw ConfigError(what + ": non-finite entry");
  return m;
}

inline Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cke::io
