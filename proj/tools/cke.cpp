// cke: coherent-classical estimation command line.
//
//   cke sweep <scenario.json>       homodyne angle sweep -> CSV/JSON
//   cke realizable <system.json>    physical realizability certificate
//   cke gridsearch <config.json>    best squeezer controller on a grid
//   cke oracle <scenario.json> --theta <deg>
//
// Exit codes: 0 success, 1 solver failure / not realizable, 2 config error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cke/cke.hpp"
#include "cke/experiments/emit.hpp"
#include "cke/experiments/grid_search.hpp"
#include "cke/experiments/scenario.hpp"
#include "cke/experiments/sweep.hpp"
#include "cke/io/system_json.hpp"

namespace {

using cke::io::Json;
namespace ex = cke::experiments;

constexpr int kOk = 0;
constexpr int kSolverFailure = 1;
constexpr int kConfigError = 2;

struct GlobalFlags {
  std::optional<double> tol;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

void write_text(const std::string& text, const std::optional<std::string>& path) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream f(*path, std::ios::binary | std::ios::trunc);
  if (!f) throw cke::ConfigError("cannot open " + *path + " for writing");
  f << text;
}

int run_sweep(const std::string& file, bool allow_failures, const GlobalFlags& flags) {
  ex::Scenario scenario = ex::load_scenario(file);
  if (flags.tol) scenario.options.tol = *flags.tol;
  const ex::OutputFormat format = flags.format ? ex::parse_format(*flags.format) : scenario.format;
  const std::optional<std::string> out = flags.out ? flags.out : scenario.output_path;
  try {
    const ex::SweepResult result = ex::run_sweep(scenario, allow_failures);
    write_text(ex::render(result, format), out);
    return kOk;
  } catch (const ex::SweepFailed& e) {
    write_text(ex::render(e.result(), format), out);
    std::cerr << "cke sweep: " << e.what() << '\n';
    return kSolverFailure;
  }
}

int run_realizable(const std::string& file, const GlobalFlags& flags) {
  const auto parsed = cke::io::parse_any_system(ex::read_json_file(file));
  const double tol = flags.tol.value_or(cke::kStructureTol);
  const cke::RealizabilityResult result =
      parsed.controller ? cke::check_controller_realizability(*parsed.controller, tol)
                        : cke::check_physical_realizability(parsed.system, tol);
  if (!result.ok()) {
    const Json j = {{"realizable", false},
                    {"clause", std::string(cke::to_string(result.failure().clause))},
                    {"reason", result.failure().message()}};
    write_text(j.dump(2) + '\n', flags.out);
    return kSolverFailure;
  }
  Json j = cke::io::realization_to_json(result.realization());
  j["realizable"] = true;
  write_text(j.dump(2) + '\n', flags.out);
  return kOk;
}

std::vector<double> theta_values(const Json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  ex::AngleGrid grid{j.value("start_deg", 0.0), j.value("stop_deg", 180.0), j.value("step_deg", 1.0)};
  return grid.values();
}

int run_gridsearch(const std::string& file, const GlobalFlags& flags) {
  const Json cfg = ex::read_json_file(file);
  if (!cfg.contains("plant")) throw cke::ConfigError("gridsearch: missing \"plant\"");
  const cke::QuantumLinearSystem plant = cke::io::parse_plant(cfg.at("plant"));
  std::vector<cke::Complex> chis;
  std::vector<double> kappas;
  std::vector<double> thetas;
  cke::SynthesisOptions opts;
  try {
    for (const Json& c : cfg.at("chi")) chis.push_back(cke::io::parse_complex(c, "gridsearch.chi"));
    kappas = cfg.at("kappa").get<std::vector<double>>();
    thetas = theta_values(cfg.at("theta"));
    opts.tol = cfg.value("tolerance", opts.tol);
  } catch (const Json::exception& e) {
    throw cke::ConfigError(std::string("gridsearch: ") + e.what());
  }
  if (flags.tol) opts.tol = *flags.tol;
  try {
    const auto result = ex::grid_search_controller(plant, chis, kappas, thetas, opts);
    for (const auto& why : result.skipped) std::cerr << "skipped " << why << '\n';
    write_text(ex::to_json(result).dump(2) + '\n', flags.out);
    return kOk;
  } catch (const ex::NoFeasibleCandidate& e) {
    std::cerr << "cke gridsearch: " << e.what() << '\n';
    return kSolverFailure;
  }
}

int run_oracle(const std::string& file, double theta, const GlobalFlags& flags) {
  ex::Scenario scenario = ex::load_scenario(file);
  if (flags.tol) scenario.options.tol = *flags.tol;
  const cke::AugmentedSystem aug = scenario.augmented();
  const auto hd = cke::quadrature_selector(scenario.detector_angles(theta, aug.measured_half_width));
  const auto est = cke::synthesize_estimator(aug, hd, scenario.options);
  const double oracle = cke::cost_via_joint_lyapunov(aug, est, hd, scenario.options.noise);
  const double gap = std::abs(est.cost - oracle);
  const bool agree = gap < ex::kOracleTolerance * (1.0 + std::abs(est.cost));
  const Json j = {{"theta_deg", theta},
                  {"riccati_cost", est.cost},
                  {"oracle_cost", oracle},
                  {"abs_difference", gap},
                  {"agree", agree},
                  {"gain_norm", est.gain_norm()},
                  {"riccati_residual", est.riccati.residual},
                  {"unfiltered_variance", cke::unfiltered_variance(aug, scenario.options.noise)}};
  write_text(j.dump(2) + '\n', flags.out);
  return agree ? kOk : kSolverFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherent-classical estimation for linear quantum systems"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--tol", flags.tol, "Solver / structure tolerance");
  app.add_option("--out", flags.out, "Output file (default: scenario setting or stdout)");
  app.add_option("--format", flags.format, "Output format: csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::string file;
  bool allow_failures = false;
  double theta = 0.0;

  auto* sweep = app.add_subcommand("sweep", "Sweep the homodyne angle of a scenario");
  sweep->add_option("scenario", file, "Scenario JSON file")->required();
  sweep->add_flag("--allow-failures", allow_failures, "Emit failed rows instead of exiting with 1");

  auto* realizable = app.add_subcommand("realizable", "Check physical realizability of a system");
  realizable->add_option("system", file, "System JSON file")->required();

  auto* grid = app.add_subcommand("gridsearch", "Grid search over squeezer controllers");
  grid->add_option("config", file, "Grid search JSON file")->required();

  auto* oracle = app.add_subcommand("oracle", "Compare Riccati and joint Lyapunov costs at one angle");
  oracle->add_option("scenario", file, "Scenario JSON file")->required();
  oracle->add_option("--theta", theta, "Homodyne angle in degrees")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sweep) return run_sweep(file, allow_failures, flags);
    if (*realizable) return run_realizable(file, flags);
    if (*grid) return run_gridsearch(file, flags);
    if (*oracle) return run_oracle(file, theta, flags);
  } catch (const cke::ConfigError& e) {
    std::cerr << "cke: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const cke::Error& e) {
    std::cerr << "cke: " << e.what() << '\n';
    return kSolverFailure;
  }
  return kConfigError;
}
