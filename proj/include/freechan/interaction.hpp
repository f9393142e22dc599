#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "freechan/errors.hpp"
#include "freechan/field.hpp"

namespace freechan {

using Point = std::array<double, 3>;
using PotentialFn = std::function<cplx(const Point& x, double t)>;

/// V(x, t) psi. Either a callable or a sampled static field.
struct LocalizedPotential {
  PotentialFn potential;
  std::optional<ComplexField> sampled;
  double delta = 0.0;
  bool time_dependent = false;
};

/// One moving bump V_j(x - t v_j, t).
struct Mover {
  PotentialFn profile;
  std::optional<ComplexField> sampled;  // profile at rest on the position lattice
  Point velocity{0.0, 0.0, 0.0};
  bool time_dependent = false;
};

struct ChargeTransfer {
  std::vector<Mover> movers;
};

/// c |psi|^m psi.
struct PowerNonlinearity {
  cplx coefficient{1.0, 0.0};
  double exponent = 2.0;
};

/// sign * (K * |psi|^2) psi, kernel sampled on the position lattice.
struct Hartree {
  RealField kernel;
  double sign = 1.0;
};

using InteractionTerm = std::variant<LocalizedPotential, ChargeTransfer, PowerNonlinearity, Hartree>;

/// Sum of interaction terms; an empty sum is the free problem.
struct Interaction {
  std::vector<InteractionTerm> terms;

  [[nodiscard]] bool empty() const { return terms.empty(); }
  [[nodiscard]] bool is_linear() const {
    for (const auto& t : terms) {
      if (std::holds_alternative<PowerNonlinearity>(t) || std::holds_alternative<Hartree>(t)) return false;
    }
    return true;
  }
  [[nodiscard]] const ChargeTransfer* charge_transfer() const {
    for (const auto& t : terms) {
      if (const auto* c = std::get_if<ChargeTransfer>(&t)) return c;
    }
    return nullptr;
  }
};

/// sup over the lattice of <x>^delta |V|; throws if not finite.
inline double decay_constant(const Grid& g, const LocalizedPotential& p, double t = 0.0) {
  double m = 0.0;
  for_each_position(g, [&](std::size_t i, const Point& x) {
    const cplx v = p.sampled ? (*p.sampled)[i] : p.potential(x, t);
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    m = std::max(m, std::pow(1.0 + r2, p.delta / 2.0) * std::abs(v));
  });
  if (!std::isfinite(m)) throw ConfigError("localized potential: <x>^delta |V| is not bounded on the grid");
  return m;
}

inline LocalizedPotential make_localized(const Grid& g, PotentialFn v, double delta, bool time_dependent = false) {
  LocalizedPotential p{std::move(v), std::nullopt, delta, time_dependent};
  if (!time_dependent) {
    ComplexField s(g.size());
    for_each_position(g, [&](std::size_t i, const Point& x) { s[i] = p.potential(x, 0.0); });
    p.sampled = std::move(s);
  }
  decay_constant(g, p);
  return p;
}

inline void validate(const ChargeTransfer& ct) {
  for (std::size_t j = 0; j < ct.movers.size(); ++j) {
    for (std::size_t l = j + 1; l < ct.movers.size(); ++l) {
      if (ct.movers[j].velocity == ct.movers[l].velocity) {
        throw ConfigError("charge transfer: movers " + std::to_string(j) + " and " + std::to_string(l) +
                          " share a velocity");
      }
    }
  }
}

/// Hartree kernel from K(y), sampled on the position lattice.
inline Hartree make_hartree(const Grid& g, const std::function<double(const Point&)>& kernel, double sign) {
  return {sample_position(g, kernel), sign};
}

namespace detail {

// Moves lattice-ordered samples (displacement x_i at slot i) into circular
// order (displacement 0 at slot 0).
inline RealField to_circular(const Grid& g, const RealField& k) {
  RealField out(k.size());
  const std::size_t n1 = g.dims > 1 ? g.points[1] : 1;
  const std::size_t n2 = g.dims > 2 ? g.points[2] : 1;
  const std::size_t h0 = g.points[0] / 2;
  const std::size_t h1 = g.dims > 1 ? n1 / 2 : 0;
  const std::size_t h2 = g.dims > 2 ? n2 / 2 : 0;
  std::size_t flat = 0;
  for (std::size_t i = 0; i < g.points[0]; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      for (std::size_t l = 0; l < n2; ++l, ++flat) {
        const std::size_t ci = (i + g.points[0] - h0) % g.points[0];
        const std::size_t cj = (j + n1 - h1) % n1;
        const std::size_t cl = (l + n2 - h2) % n2;
        out[(ci * n1 + cj) * n2 + cl] = k[flat];
      }
    }
  }
  return out;
}

// Circular convolution (K * rho)(x) = sum_y K(x - y) rho(y) dV.
inline RealField convolve(const Grid& g, const RealField& kernel, const RealField& rho) {
  if (kernel.size() != g.size()) throw UsageError("hartree: kernel is not sampled on the state grid");
  const RealField kc = to_circular(g, kernel);
  ComplexField a(kc.begin(), kc.end());
  ComplexField b(rho.begin(), rho.end());
  fft_forward_raw(g, a);
  fft_forward_raw(g, b);
  const double s = g.cell_volume() / static_cast<double>(g.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i] * s;
  fft_backward_raw(g, a);
  RealField out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real();
  return out;
}

inline cplx sample_fn(const PotentialFn& f, const Grid& g, const Point& x, const Point& shift, double t) {
  Point y{0.0, 0.0, 0.0};
  for (int d = 0; d < g.dims; ++d) y[d] = g.wrap(d, x[d] - shift[d]);
  return f(y, t);
}

}  // namespace detail

/// Field V_j(x - t v_j, t) of one mover on the position lattice.
inline ComplexField mover_field(const Grid& g, const Mover& m, double t) {
  Point shift{0.0, 0.0, 0.0};
  for (int d = 0; d < g.dims; ++d) shift[d] = t * m.velocity[d];
  ComplexField out(g.size());
  if (m.sampled && !m.time_dependent) {
    if (m.sampled->size() != g.size()) throw UsageError("mover: sampled profile is not on the state grid");
    // f(x - s) via the frequency phase e^{-i k.s}; real profiles stay real.
    WaveFunction w(g, *m.sampled);
    const RealField kdot = sample_frequency(g, [&](const Point& k) {
      return k[0] * shift[0] + k[1] * shift[1] + k[2] * shift[2];
    });
    ComplexField phase(g.size());
    for (std::size_t i = 0; i < phase.size(); ++i) phase[i] = std::polar(1.0, -kdot[i]);
    w = apply_multiplier(std::move(w), std::span<const cplx>(phase), Space::frequency);
    const bool real = std::all_of(m.sampled->begin(), m.sampled->end(), [](cplx v) { return v.imag() == 0.0; });
    if (real) {
      for (auto& v : w.values) v = {v.real(), 0.0};
    }
    return std::move(w.values);
  }
  for_each_position(g, [&](std::size_t i, const Point& x) { out[i] = detail::sample_fn(m.profile, g, x, shift, t); });
  return out;
}

/// W(x, t, |psi|) with N(psi) = W psi.
inline ComplexField interaction_eval(const Interaction& in, const WaveFunction& state, double t) {
  detail::require_position(state, "interaction_eval");
  const Grid& g = state.grid;
  ComplexField w(g.size(), cplx{0.0, 0.0});
  for (const auto& term : in.terms) {
    if (const auto* lp = std::get_if<LocalizedPotential>(&term)) {
      if (lp->sampled && !lp->time_dependent) {
        if (lp->sampled->size() != g.size()) throw UsageError("localized potential: sampled field is not on the state grid");
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += (*lp->sampled)[i];
      } else {
        for_each_position(g, [&](std::size_t i, const Point& x) { w[i] += lp->potential(x, t); });
      }
    } else if (const auto* ct = std::get_if<ChargeTransfer>(&term)) {
      for (const auto& m : ct->movers) {
        const ComplexField f = mover_field(g, m, t);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += f[i];
      }
    } else if (const auto* pn = std::get_if<PowerNonlinearity>(&term)) {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += pn->coefficient * std::pow(std::abs(state.values[i]), pn->exponent);
    } else if (const auto* h = std::get_if<Hartree>(&term)) {
      RealField rho(g.size());
      for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(state.values[i]);
      const RealField c = detail::convolve(g, h->kernel, rho);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += h->sign * c[i];
    }
  }
  return w;
}

}  // namespace freechan
