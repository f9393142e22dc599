#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "freechan/cutoffs.hpp"
#include "freechan/errors.hpp"
#include "freechan/field.hpp"
#include "freechan/propagators.hpp"

namespace freechan {

/// alpha: position scale exponent, b: momentum scale exponent (0 disables),
/// a: Sobolev weight order.
struct ProjectorParams {
  double alpha = 0.4;
  double b = 0.0;
  double a = 0.0;
};

/// Range checks for the decomposition theorems; returns warnings, never throws.
/// delta <= 0 skips the b-range check.
inline std::vector<std::string> check_params(const ProjectorParams& p, int dims, double delta = 0.0) {
  std::vector<std::string> w;
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) w.push_back("alpha outside (0, 1)");
  if (!(p.a >= 0.0 && p.a <= 1.0)) w.push_back("a outside [0, 1]");
  if (p.b > 0.0) {
    if (delta > 0.0) {
      const double e = (1.0 + 1.0 / delta) / 2.0;
      if (!(p.b < 1.0 - e)) w.push_back("b outside (0, 1 - e) for the given delta");
    }
    if (!(p.alpha > p.b && p.alpha < 1.0 - p.b)) w.push_back("alpha outside (b, 1 - b)");
    if (p.a != 0.0) w.push_back("a is forced to 0 when b > 0");
  } else if (dims > 2 && !(p.alpha < 1.0 - 2.0 / dims)) {
    w.push_back("alpha outside (0, 1 - 2/n)");
  }
  return w;
}

/// e^{itH0} psi(t): undoes the free evolution up to time t.
inline WaveFunction asymptotic_profile(WaveFunction state, double t, const Dispersion& disp = {}) {
  return free_flow(std::move(state), -t, disp);
}

inline RealField sobolev_weight_field(const Grid& g, double a, int sign) {
  const double e = sign >= 0 ? a / 2.0 : -a / 2.0;
  return sample_frequency(g, [&](const Point& k) { return std::pow(1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2], e); });
}

/// <P>^{+a} for sign >= 0, <P>^{-a} otherwise.
inline WaveFunction apply_sobolev_weight(WaveFunction state, double a, int sign) {
  if (a == 0.0) return state;
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("apply_sobolev_weight: a must lie in [0, 1]");
  const RealField f = sobolev_weight_field(state.grid, a, sign);
  return apply_multiplier(std::move(state), std::span<const double>(f), Space::frequency);
}

inline CutoffSpec position_cutoff_spec(double alpha, bool bar = false) {
  return CutoffSpec::scaled(bar ? CutoffKind::Fc_bar_gt : CutoffKind::Fc_leq, alpha);
}

inline CutoffSpec momentum_cutoff_spec(double b, bool bar = false) {
  return CutoffSpec::scaled(bar ? CutoffKind::F1_bar_leq : CutoffKind::F1_gt, -b);
}

inline WaveFunction apply_cutoff(WaveFunction state, const CutoffSpec& spec, double t) {
  const RealField f = cutoff_field(state.grid, spec, t);
  return apply_multiplier(std::move(state), std::span<const double>(f), spec.space());
}

/// F_c(|x - 2tP| / t^alpha <= 1) realized as e^{-itH0} F_c(|x|/t^alpha) e^{itH0}.
inline WaveFunction apply_moving_cutoff(WaveFunction state, double t, double alpha, const Dispersion& disp = {},
                                        bool bar = false) {
  const double t0 = state.time;
  state = free_flow(std::move(state), -t, disp);
  state = apply_cutoff(std::move(state), position_cutoff_spec(alpha, bar), t);
  state = free_flow(std::move(state), t, disp);
  state.time = t0;
  return state;
}

/// F_1(t^b |P| > 1), or its complement for kind F1_bar_leq.
inline WaveFunction apply_momentum_cutoff(WaveFunction state, double t, double b, CutoffKind kind = CutoffKind::F1_gt) {
  if (kind != CutoffKind::F1_gt && kind != CutoffKind::F1_bar_leq) {
    throw UsageError("apply_momentum_cutoff: kind must be F1_gt or F1_bar_leq");
  }
  return apply_cutoff(std::move(state), momentum_cutoff_spec(b, kind == CutoffKind::F1_bar_leq), t);
}

/// e^{itH0} V e^{-itH0} applied to state, i.e. V(x + 2tP, t) for the Laplacian.
inline WaveFunction tT_apply(std::span<const cplx> v, WaveFunction state, double t, const Dispersion& disp = {}) {
  const double t0 = state.time;
  state = free_flow(std::move(state), t, disp);
  state = apply_multiplier(std::move(state), v, Space::position);
  state = free_flow(std::move(state), -t, disp);
  state.time = t0;
  return state;
}

/// Normalized Gaussian packet exp(-|x - x0|^2 / (2 sigma^2) + i k0.x).
inline WaveFunction coherent_state(const Grid& g, const Point& x0, const Point& k0, double sigma) {
  for (int d = 0; d < g.dims; ++d) {
    if (!(sigma > 0.0) || sigma > g.half_length[d] / 8.0) throw UsageError("coherent_state: width does not fit the box");
    if (std::abs(x0[d]) > g.half_length[d] / 2.0) throw UsageError("coherent_state: center too close to the boundary");
    if (std::abs(k0[d]) + 8.0 / sigma > g.max_frequency(d)) {
      throw UsageError("coherent_state: momentum content exceeds the frequency lattice");
    }
  }
  WaveFunction w = WaveFunction::zeros(g);
  for_each_position(g, [&](std::size_t i, const Point& x) {
    double r2 = 0.0;
    double ph = 0.0;
    for (int d = 0; d < g.dims; ++d) {
      const double dx = g.wrap(d, x[d] - x0[d]);
      r2 += dx * dx;
      ph += k0[d] * (x0[d] + dx);
    }
    w.values[i] = std::polar(std::exp(-r2 / (2.0 * sigma * sigma)), ph);
  });
  const double n = norm(w);
  for (auto& v : w.values) v /= n;
  return w;
}

/// Position mean per axis, (psi, x_d psi) / ||psi||^2, taken relative to a
/// reference point with minimum-image displacements.
inline Point position_mean(const WaveFunction& state, const Point& reference = {0.0, 0.0, 0.0}) {
  detail::require_position(state, "position_mean");
  const Grid& g = state.grid;
  Point m{0.0, 0.0, 0.0};
  double total = 0.0;
  for_each_position(g, [&](std::size_t i, const Point& x) {
    const double p = std::norm(state.values[i]);
    total += p;
    for (int d = 0; d < g.dims; ++d) m[d] += p * g.wrap(d, x[d] - reference[d]);
  });
  for (int d = 0; d < g.dims; ++d) m[d] = total > 0 ? reference[d] + m[d] / total : reference[d];
  return m;
}

/// Frequency mean per axis, (psi_hat, k_d psi_hat) / ||psi||^2.
inline Point frequency_mean(const WaveFunction& state) {
  const WaveFunction f = state.in_position() ? spectral_transform(state, Direction::to_frequency) : state;
  Point m{0.0, 0.0, 0.0};
  double total = 0.0;
  for_each_frequency(f.grid, [&](std::size_t i, const Point& k) {
    const double p = std::norm(f.values[i]);
    total += p;
    for (int d = 0; d < f.grid.dims; ++d) m[d] += p * k[d];
  });
  for (int d = 0; d < f.grid.dims; ++d) m[d] /= total;
  return m;
}

}  // namespace freechan
