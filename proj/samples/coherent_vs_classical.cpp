// Compares classical-only and coherent-classical estimation of the cavity
// momentum quadrature at a few homodyne angles.

#include <cstdio>

#include "cke/cke.hpp"

int main() {
  const auto plant = cke::build_cavity_plant(0.5, 0.5, 0.0);
  const auto squeezer = cke::build_squeezer_controller(5.0, 5.0, -0.5);

  const cke::AugmentedSystem classical = cke::classical_only(plant);
  const cke::AugmentedSystem coherent = cke::close_loop(plant, squeezer);

  std::printf("%8s %12s %12s\n", "theta", "classical", "coherent");
  for (double theta : {0.0, 45.0, 90.0, 135.0}) {
    const auto hd = cke::quadrature_selector({theta});
    const double j_classical = cke::synthesize_estimator(classical, hd).cost;
    const double j_coherent = cke::synthesize_estimator(coherent, hd).cost;
    std::printf("%8.1f %12.8f %12.8f\n", theta, j_classical, j_coherent);
  }
  return 0;
}
