#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cke/doubled_algebra.hpp"
#include "cke/errors.hpp"

namespace cke {

/// Homodyne detection of one quadrature per field channel. Channel i yields
/// the classical increment cos(t_i) dY_i + sin(t_i) dY_i#, so the selector is
/// L = [diag(cos t) | diag(sin t)] acting on the doubled field [Y; Y#].
///
/// The angle is applied literally: t = 135 deg picks (-Y + Y#)/sqrt(2), which
/// is what the estimation examples call the momentum quadrature.
class HomodyneScheme {
 public:
  explicit HomodyneScheme(std::vector<double> angles_rad) : angles_(std::move(angles_rad)) {
    if (angles_.empty()) throw ConfigError("homodyne scheme needs at least one detector angle");
    const Index m = channels();
    L_ = Eigen::MatrixXd::Zero(m, 2 * m);
    for (Index i = 0; i < m; ++i) {
      L_(i, i) = std::cos(angles_[static_cast<std::size_t>(i)]);
      L_(i, m + i) = std::sin(angles_[static_cast<std::size_t>(i)]);
    }
  }

  Index channels() const noexcept { return static_cast<Index>(angles_.size()); }
  const std::vector<double>& angles_rad() const noexcept { return angles_; }
  const Eigen::MatrixXd& L() const noexcept { return L_; }
  ComplexMatrix L_complex() const { return L_.cast<Complex>(); }

 private:
  std::vector<double> angles_;
  Eigen::MatrixXd L_;
};

/// Reduces to [0, 360) in degrees before converting, so angles that differ by
/// whole turns give bit-identical selectors.
inline double degrees_to_radians(double deg) {
  double reduced = std::fmod(deg, 360.0);
  if (reduced < 0) reduced += 360.0;
  return reduced * std::numbers::pi / 180.0;
}

inline HomodyneScheme quadrature_selector(std::span<const double> angles_deg) {
  std::vector<double> rad;
  rad.reserve(angles_deg.size());
  for (double deg : angles_deg) {
    if (!std::isfinite(deg)) throw ConfigError("homodyne angle must be finite");
    rad.push_back(degrees_to_radians(deg));
  }
  return HomodyneScheme(std::move(rad));
}

inline HomodyneScheme quadrature_selector(std::initializer_list<double> angles_deg) {
  return quadrature_selector(std::span<const double>(angles_deg.begin(), angles_deg.size()));
}

}  // namespace cke
