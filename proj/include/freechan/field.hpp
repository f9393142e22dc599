#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "freechan/errors.hpp"
#include "freechan/fft.hpp"
#include "freechan/grid.hpp"

namespace freechan {

using RealField = std::vector<double>;
using ComplexField = std::vector<cplx>;

enum class Representation : std::uint8_t { position = 0, frequency = 1 };
enum class Space { position, frequency };
enum class Direction { to_frequency, to_position };

/// Complex field on a grid with a physical time stamp.
///
/// In the frequency representation the samples approximate the continuum
/// Fourier transform (2 pi)^{-n/2} \int e^{-ik.x} psi(x) dx, so L2 norms agree
/// between representations when weighted by the respective cell volumes.
struct WaveFunction {
  Grid grid;
  ComplexField values;
  double time = 0.0;
  Representation representation = Representation::position;

  WaveFunction() = default;
  WaveFunction(Grid g, ComplexField v, double t = 0.0, Representation r = Representation::position)
      : grid(g), values(std::move(v)), time(t), representation(r) {
    if (values.size() != grid.size()) throw UsageError("wavefunction: sample count does not match grid");
  }

  static WaveFunction zeros(const Grid& g, double t = 0.0) { return {g, ComplexField(g.size()), t}; }

  [[nodiscard]] bool in_position() const { return representation == Representation::position; }
};

namespace detail {

inline void require_position(const WaveFunction& w, const char* op) {
  if (!w.in_position()) throw UsageError(std::string(op) + ": state must be in position representation");
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* op) {
  if (!(a == b)) throw UsageError(std::string(op) + ": grid mismatch");
}

// (-1)^{m_0 + m_1 + ...} over signed modes; accounts for the x = -L origin.
inline void apply_origin_phase(const Grid& g, std::span<cplx> data) {
  const std::size_t n1 = g.dims > 1 ? g.points[1] : 1;
  const std::size_t n2 = g.dims > 2 ? g.points[2] : 1;
  std::size_t flat = 0;
  for (std::size_t i = 0; i < g.points[0]; ++i) {
    const long si = g.signed_mode(0, i);
    for (std::size_t j = 0; j < n1; ++j) {
      const long sj = g.dims > 1 ? g.signed_mode(1, j) : 0;
      for (std::size_t k = 0; k < n2; ++k, ++flat) {
        const long sk = g.dims > 2 ? g.signed_mode(2, k) : 0;
        if (((si + sj + sk) & 1L) != 0) data[flat] = -data[flat];
      }
    }
  }
}

inline double forward_scale(const Grid& g) {
  double s = 1.0;
  for (int d = 0; d < g.dims; ++d) s *= g.spacing(d) / std::sqrt(2.0 * std::numbers::pi);
  return s;
}

inline double backward_scale(const Grid& g) {
  double s = 1.0;
  for (int d = 0; d < g.dims; ++d) s *= g.frequency_step(d) / std::sqrt(2.0 * std::numbers::pi);
  return s;
}

inline double cell(const WaveFunction& w) {
  return w.in_position() ? w.grid.cell_volume() : w.grid.frequency_cell_volume();
}

}  // namespace detail

/// Plancherel-normalized transform between position and frequency samples.
inline WaveFunction spectral_transform(WaveFunction state, Direction direction) {
  const Grid& g = state.grid;
  if (direction == Direction::to_frequency) {
    if (!state.in_position()) throw UsageError("spectral_transform: state already in frequency representation");
    fft_forward_raw(g, state.values);
    const double s = detail::forward_scale(g);
    for (auto& v : state.values) v *= s;
    detail::apply_origin_phase(g, state.values);
    state.representation = Representation::frequency;
  } else {
    if (state.in_position()) throw UsageError("spectral_transform: state already in position representation");
    detail::apply_origin_phase(g, state.values);
    fft_backward_raw(g, state.values);
    const double s = detail::backward_scale(g);
    for (auto& v : state.values) v *= s;
    state.representation = Representation::position;
  }
  return state;
}

namespace detail {

// Frequency multiplier applied to position samples in place. The origin phase
// and continuum scalings cancel, leaving only the 1/N of the raw DFT pair.
template <class Field>
void multiply_in_frequency(const Grid& g, std::span<cplx> data, const Field& field) {
  fft_forward_raw(g, data);
  const double inv_n = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= field[i] * inv_n;
  fft_backward_raw(g, data);
}

template <class Field>
WaveFunction apply_multiplier_impl(WaveFunction state, const Field& field, Space space) {
  const Grid& g = state.grid;
  if (field.size() != g.size()) throw UsageError("apply_multiplier: field size does not match grid");
  const bool pos = state.in_position();
  if ((space == Space::position) == pos) {
    for (std::size_t i = 0; i < field.size(); ++i) state.values[i] *= field[i];
    return state;
  }
  if (space == Space::frequency) {
    multiply_in_frequency(g, state.values, field);
    return state;
  }
  state = spectral_transform(std::move(state), Direction::to_position);
  for (std::size_t i = 0; i < field.size(); ++i) state.values[i] *= field[i];
  return spectral_transform(std::move(state), Direction::to_frequency);
}

}  // namespace detail

/// Pointwise product in the requested space; the state keeps its representation.
inline WaveFunction apply_multiplier(WaveFunction state, std::span<const double> field, Space space) {
  return detail::apply_multiplier_impl(std::move(state), field, space);
}

inline WaveFunction apply_multiplier(WaveFunction state, std::span<const cplx> field, Space space) {
  return detail::apply_multiplier_impl(std::move(state), field, space);
}

struct NormSpec {
  enum class Kind { l2, lp, sobolev, weighted_l2 };
  Kind kind = Kind::l2;
  double param = 2.0;

  static NormSpec L2() { return {Kind::l2, 2.0}; }
  static NormSpec Lp(double p) { return {Kind::lp, p}; }
  static NormSpec Linf() { return {Kind::lp, std::numeric_limits<double>::infinity()}; }
  static NormSpec Ha(double a) { return {Kind::sobolev, a}; }
  static NormSpec WeightedL2(double delta) { return {Kind::weighted_l2, delta}; }
};

namespace detail {

inline double l2_raw(const WaveFunction& w) {
  double s = 0.0;
  for (const auto& v : w.values) s += std::norm(v);
  return std::sqrt(s * cell(w));
}

}  // namespace detail

/// Lattice quadrature of the continuum norm (rectangle rule on the torus).
/// Lp(inf) is the lattice maximum, a lower bound on the continuum sup.
inline double norm(const WaveFunction& state, const NormSpec& spec = NormSpec::L2()) {
  switch (spec.kind) {
    case NormSpec::Kind::l2:
      return detail::l2_raw(state);
    case NormSpec::Kind::lp: {
      const double p = spec.param;
      if (!(p >= 1.0)) throw DomainError("norm: Lp requires p >= 1");
      const WaveFunction& pos = state.in_position() ? state : spectral_transform(state, Direction::to_position);
      if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& v : pos.values) m = std::max(m, std::abs(v));
        return m;
      }
      double s = 0.0;
      for (const auto& v : pos.values) s += std::pow(std::abs(v), p);
      return std::pow(s * pos.grid.cell_volume(), 1.0 / p);
    }
    case NormSpec::Kind::sobolev: {
      const WaveFunction freq =
          state.in_position() ? spectral_transform(state, Direction::to_frequency) : state;
      double s = 0.0;
      for_each_frequency(freq.grid, [&](std::size_t i, const std::array<double, 3>& q) {
        const double k2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
        s += std::pow(1.0 + k2, spec.param) * std::norm(freq.values[i]);
      });
      return std::sqrt(s * freq.grid.frequency_cell_volume());
    }
    case NormSpec::Kind::weighted_l2: {
      const WaveFunction& pos = state.in_position() ? state : spectral_transform(state, Direction::to_position);
      double s = 0.0;
      for_each_position(pos.grid, [&](std::size_t i, const std::array<double, 3>& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        s += std::pow(1.0 + r2, spec.param) * std::norm(pos.values[i]);
      });
      return std::sqrt(s * pos.grid.cell_volume());
    }
  }
  return 0.0;
}

/// (a, b) = sum conj(a) b dV, conjugate-linear in the first argument.
inline cplx inner_product(const WaveFunction& a, const WaveFunction& b) {
  detail::require_same_grid(a.grid, b.grid, "inner_product");
  if (a.representation != b.representation) throw UsageError("inner_product: representation mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::conj(a.values[i]) * b.values[i];
  return s * detail::cell(a);
}

struct MomentWeight {
  enum class Kind { abs, bracket };
  Kind kind = Kind::abs;
  std::array<double, 3> center{0.0, 0.0, 0.0};

  static MomentWeight Abs(std::array<double, 3> c = {0.0, 0.0, 0.0}) { return {Kind::abs, c}; }
  static MomentWeight Bracket(std::array<double, 3> c = {0.0, 0.0, 0.0}) { return {Kind::bracket, c}; }
};

/// (psi, w(x) psi) for w = |x - c| or <x - c>, with minimum-image distances.
inline double x_moment(const WaveFunction& state, const MomentWeight& weight = MomentWeight::Abs()) {
  detail::require_position(state, "x_moment");
  const Grid& g = state.grid;
  double s = 0.0;
  for_each_position(g, [&](std::size_t i, const std::array<double, 3>& x) {
    double r2 = 0.0;
    for (int d = 0; d < g.dims; ++d) {
      const double dd = g.wrap(d, x[d] - weight.center[d]);
      r2 += dd * dd;
    }
    const double w = weight.kind == MomentWeight::Kind::abs ? std::sqrt(r2) : std::sqrt(1.0 + r2);
    s += w * std::norm(state.values[i]);
  });
  return s * g.cell_volume();
}

/// Fraction of L2 mass in the outer shell |x_d| > (1 - shell) L_d of any axis.
inline double boundary_mass_fraction(const WaveFunction& state, double shell = 0.1) {
  detail::require_position(state, "boundary_mass_fraction");
  const Grid& g = state.grid;
  double outer = 0.0;
  double total = 0.0;
  for_each_position(g, [&](std::size_t i, const std::array<double, 3>& x) {
    const double m = std::norm(state.values[i]);
    total += m;
    for (int d = 0; d < g.dims; ++d) {
      if (std::abs(x[d]) > (1.0 - shell) * g.half_length[d]) {
        outer += m;
        break;
      }
    }
  });
  return total > 0.0 ? outer / total : 0.0;
}

/// Samples a real function of position onto the lattice.
template <class F>
RealField sample_position(const Grid& g, F&& f) {
  RealField out(g.size());
  for_each_position(g, [&](std::size_t i, const std::array<double, 3>& x) { out[i] = f(x); });
  return out;
}

/// Samples a real function of frequency onto the lattice (FFT ordering).
template <class F>
RealField sample_frequency(const Grid& g, F&& f) {
  RealField out(g.size());
  for_each_frequency(g, [&](std::size_t i, const std::array<double, 3>& q) { out[i] = f(q); });
  return out;
}

// Small vector-space helpers over states on a common grid and representation.
inline WaveFunction operator+(WaveFunction a, const WaveFunction& b) {
  detail::require_same_grid(a.grid, b.grid, "add");
  if (a.representation != b.representation) throw UsageError("add: representation mismatch");
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
  return a;
}

inline WaveFunction operator-(WaveFunction a, const WaveFunction& b) {
  detail::require_same_grid(a.grid, b.grid, "subtract");
  if (a.representation != b.representation) throw UsageError("subtract: representation mismatch");
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] -= b.values[i];
  return a;
}

inline WaveFunction operator*(cplx c, WaveFunction a) {
  for (auto& v : a.values) v *= c;
  return a;
}

/// L2 distance ||a - b|| without allocating.
inline double distance(const WaveFunction& a, const WaveFunction& b) {
  detail::require_same_grid(a.grid, b.grid, "distance");
  if (a.representation != b.representation) throw UsageError("distance: representation mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::norm(a.values[i] - b.values[i]);
  return std::sqrt(s * detail::cell(a));
}

}  // namespace freechan
