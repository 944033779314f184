#pragma once

// Exhaustive search over squeezer controllers (chi, kappa1 = kappa2 = kappa)
// and homodyne angles for the lowest estimation cost.

#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cke/interconnect.hpp"
#include "cke/io/matrix_json.hpp"
#include "cke/synthesis.hpp"

namespace cke::experiments {

class NoFeasibleCandidate : public Error {
 public:
  using Error::Error;
};

struct GridCandidate {
  Complex chi;
  double kappa = 0.0;
  double theta_deg = 0.0;
  double cost = 0.0;
};

struct GridSearchResult {
  GridCandidate best;
  std::size_t evaluated = 0;
  std::vector<std::string> skipped;
};

namespace detail {

// Lower cost wins; near-ties go to smaller |chi|, then kappa, then theta.
inline bool better(const GridCandidate& a, const GridCandidate& b) {
  const double tie = 1e-12 * (1.0 + std::abs(b.cost));
  if (a.cost < b.cost - tie) return true;
  if (a.cost > b.cost + tie) return false;
  return std::make_tuple(std::abs(a.chi), a.kappa, a.theta_deg) <
         std::make_tuple(std::abs(b.chi), b.kappa, b.theta_deg);
}

inline std::string describe(Complex chi, double kappa) {
  std::ostringstream os;
  os << "chi=" << chi << " kappa=" << kappa;
  return os.str();
}

}  // namespace detail

inline GridSearchResult grid_search_controller(const QuantumLinearSystem& plant, std::span<const Complex> chi_grid,
                                               std::span<const double> kappa_grid,
                                               std::span<const double> theta_grid_deg,
                                               const SynthesisOptions& opts = {}) {
  if (chi_grid.empty() || kappa_grid.empty() || theta_grid_deg.empty()) {
    throw ConfigError("grid search needs non-empty chi, kappa and theta grids");
  }
  GridSearchResult result;
  std::optional<GridCandidate> best;
  for (const Complex chi : chi_grid) {
    for (const double kappa : kappa_grid) {
      std::optional<AugmentedSystem> aug;
      try {
        aug = close_loop(plant, build_squeezer_controller(kappa, kappa, chi));
      } catch (const std::exception& e) {
        result.skipped.push_back(detail::describe(chi, kappa) + ": " + e.what());
        continue;
      }
      for (const double theta : theta_grid_deg) {
        try {
          const auto est = synthesize_estimator(*aug, quadrature_selector({theta}), opts);
          ++result.evaluated;
          const GridCandidate cand{chi, kappa, theta, est.cost};
          if (!best || detail::better(cand, *best)) best = cand;
        } catch (const Error& e) {
          result.skipped.push_back(detail::describe(chi, kappa) + " theta=" + std::to_string(theta) + ": " +
                                   e.what());
        }
      }
    }
  }
  if (!best) throw NoFeasibleCandidate("no feasible controller candidate in the grid");
  result.best = *best;
  return result;
}

inline io::Json to_json(const GridSearchResult& r) {
  return {{"chi", io::complex_to_json(r.best.chi)},
          {"kappa", r.best.kappa},
          {"theta_deg", r.best.theta_deg},
          {"cost", r.best.cost},
          {"evaluated", r.evaluated},
          {"skipped", r.skipped}};
}

}  // namespace cke::experiments
