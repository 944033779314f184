#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cke/experiments/scenario.hpp"
#include "cke/synthesis.hpp"

namespace cke::experiments {

/// Relative agreement required between the Riccati cost and the joint
/// Lyapunov oracle.
inline constexpr double kOracleTolerance = 1e-8;

struct SweepRow {
  double theta_deg = 0.0;
  double cost = std::numeric_limits<double>::quiet_NaN();
  double gain_norm = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool stabilizing = false;
  double oracle_cost = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct SweepResult {
  std::string scenario;
  std::vector<SweepRow> rows;

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.ok() ? 0 : 1;
    return n;
  }
};

class SweepFailed : public Error {
 public:
  explicit SweepFailed(SweepResult result)
      : Error(std::to_string(result.failures()) + " of " + std::to_string(result.rows.size()) +
              " sweep rows failed" + first_error(result)),
        result_(std::move(result)) {}

  const SweepResult& result() const noexcept { return result_; }

 private:
  static std::string first_error(const SweepResult& r) {
    for (const auto& row : r.rows) {
      if (!row.ok()) return "; first at theta=" + std::to_string(row.theta_deg) + ": " + row.error;
    }
    return {};
  }

  SweepResult result_;
};

/// Estimator synthesis plus oracle check at a single sweep angle. Solver
/// errors are captured in the row.
inline SweepRow evaluate_angle(const Scenario& scenario, const AugmentedSystem& aug, double theta_deg) {
  SweepRow row;
  row.theta_deg = theta_deg;
  try {
    const HomodyneScheme hd = quadrature_selector(scenario.detector_angles(theta_deg, aug.measured_half_width));
    const EstimatorSynthesis est = synthesize_estimator(aug, hd, scenario.options);
    row.cost = est.cost;
    row.gain_norm = est.gain_norm();
    row.residual = est.riccati.residual;
    row.stabilizing = est.riccati.stabilizing;
    row.oracle_cost = cost_via_joint_lyapunov(aug, est, hd, scenario.options.noise);
    if (!(std::abs(row.cost - row.oracle_cost) < kOracleTolerance * (1.0 + std::abs(row.cost)))) {
      row.error = "oracle mismatch: Riccati cost " + std::to_string(row.cost) + " vs joint Lyapunov " +
                  std::to_string(row.oracle_cost);
    }
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

/// Runs every angle of the scenario grid in ascending order. Throws
/// SweepFailed (carrying the full result) if any row failed, unless
/// `allow_failures`.
inline SweepResult run_sweep(const Scenario& scenario, bool allow_failures = false) {
  const AugmentedSystem aug = scenario.augmented();
  SweepResult result{scenario.name, {}};
  for (double theta : scenario.grid.values()) result.rows.push_back(evaluate_angle(scenario, aug, theta));
  if (!allow_failures && result.failures() > 0) throw SweepFailed(std::move(result));
  return result;
}

}  // namespace cke::experiments
