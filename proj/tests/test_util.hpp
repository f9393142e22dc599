#pragma once

#include <complex>
#include <random>

#include "freechan/freechan.hpp"

namespace testutil {

using freechan::cplx;

inline freechan::WaveFunction random_state(const freechan::Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto w = freechan::WaveFunction::zeros(g);
  for (auto& v : w.values) v = {nd(rng), nd(rng)};
  return w;
}

/// exp(-|x|^2 / (2 sigma^2)), unnormalized.
inline freechan::WaveFunction gaussian(const freechan::Grid& g, double sigma, freechan::Point center = {0, 0, 0}) {
  auto w = freechan::WaveFunction::zeros(g);
  freechan::for_each_position(g, [&](std::size_t i, const freechan::Point& x) {
    double r2 = 0;
    for (int d = 0; d < g.dims; ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
    w.values[i] = std::exp(-r2 / (2 * sigma * sigma));
  });
  return w;
}

/// Closed-form free Schrodinger evolution (i d_t psi = -psi'') of exp(-x^2/(2 sigma^2)) in 1D.
inline cplx free_gaussian_1d(double x, double t, double sigma) {
  const cplx s = cplx(sigma * sigma, 2 * t);
  return std::sqrt(sigma * sigma / s) * std::exp(-x * x / (2.0 * s));
}

inline double max_abs_diff(const freechan::WaveFunction& a, const freechan::WaveFunction& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace testutil
