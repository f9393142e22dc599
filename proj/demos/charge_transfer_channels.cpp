// Two attractive wells moving apart; the bound mass splits into per-well
// channels that ride along with their wells.

#include <cmath>
#include <cstdio>

#include "freechan/freechan.hpp"

using namespace freechan;

int main() {
  const Grid g = make_grid(1, 1 << 13, 512.0);
  auto well = [](double c) {
    return [c](const Point& y, double) { return cplx(-0.6 * std::exp(-(y[0] - c) * (y[0] - c) / 2.25), 0); };
  };
  const ChargeTransfer ct{{Mover{well(-4.0), std::nullopt, {-0.5, 0, 0}}, Mover{well(4.0), std::nullopt, {0.5, 0, 0}}}};
  const Interaction in{{ct}};
  const WaveFunction psi0 = coherent_state(g, {0, 0, 0}, {0, 0, 0}, 3.0);

  DuhamelAccumulator acc(ct, dyadic_schedule(64.0));
  SplitStepConfig cfg;
  cfg.dt = 1e-2;
  const Trajectory tr = evolve(psi0, in, cfg, 64.0, std::ref(acc));
  if (tr.aborted()) {
    std::printf("aborted: %s\n", tr.diagnostic.c_str());
    return 1;
  }
  const ChargeChannelRecord rec = charge_channels(tr, ct, acc, psi0, {0.4, 0.0, 0.0}, 0.1);

  std::printf("%6s %12s %12s %12s %12s %12s %12s\n", "t", "duhamel", "|w_1|", "x_1", "|w_2|", "x_2", "|R_12|");
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    std::printf("%6.0f %12.3e %12.5f %12.4f %12.5f %12.4f %12.3e\n", rec.times[i], rec.duhamel_residual[i], rec.weak_norms[i][0],
                rec.weak_centers[i][0][0], rec.weak_norms[i][1], rec.weak_centers[i][1][0], std::abs(rec.overlaps[i][0][1]));
  }
  for (const auto& w : rec.warnings) std::printf("warning: %s\n", w.c_str());
  return 0;
}
