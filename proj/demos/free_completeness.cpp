// Free flow of a Gaussian: Omega*(T) psi0 approaches psi0 as T grows,
// and the cutoff observable is nondecreasing along the flow.

#include <cstdio>

#include "freechan/freechan.hpp"

using namespace freechan;

int main() {
  const Grid g = make_grid(1, 1 << 14, 2048.0);
  const WaveFunction psi0 = coherent_state(g, {0, 0, 0}, {0.5, 0, 0}, 1.5);
  SplitStepConfig cfg;
  cfg.dt = 4.0;
  const Trajectory tr = evolve(psi0, Interaction{}, cfg, 256.0);

  std::printf("%8s %16s %16s\n", "T", "|Om*(T)psi0-psi0|", "<F_c(T)>");
  const ProjectorParams p{0.4, 0.0, 0.0};
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double t = tr.times[i];
    if (t < 1.0) continue;
    const WaveFunction om = omega_t(tr.snapshots[i], p);
    const WaveFunction fc = apply_moving_cutoff(tr.snapshots[i], t, p.alpha);
    std::printf("%8.0f %16.6e %16.10f\n", t, distance(om, psi0), inner_product(tr.snapshots[i], fc).real());
  }
  std::printf("final status: %s\n", tr.status.c_str());
  return tr.aborted() ? 1 : 0;
}
