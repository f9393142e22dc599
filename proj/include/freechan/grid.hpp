#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <string>

#include "freechan/errors.hpp"

namespace freechan {

inline constexpr std::size_t kDefaultPointBudget = std::size_t{1} << 24;

/// Periodic box [-L_d, L_d) per axis with N_d points per axis.
///
/// Position samples sit at x_i = -L + i * (2L/N). Frequency samples use FFT
/// ordering: storage slot m holds k = (pi/L) * m for m < N/2 and
/// (pi/L) * (m - N) otherwise, so the lattice is (pi/L) * {-N/2, ..., N/2-1}.
/// Flat storage is row-major with the last axis fastest.
struct Grid {
  int dims = 1;
  std::array<std::size_t, 3> points{1, 1, 1};
  std::array<double, 3> half_length{1.0, 1.0, 1.0};

  [[nodiscard]] double spacing(int d) const {
    return 2.0 * half_length[d] / static_cast<double>(points[d]);
  }
  [[nodiscard]] double frequency_step(int d) const {
    return std::numbers::pi / half_length[d];
  }
  [[nodiscard]] std::size_t size() const {
    std::size_t n = 1;
    for (int d = 0; d < dims; ++d) n *= points[d];
    return n;
  }
  [[nodiscard]] double cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < dims; ++d) v *= spacing(d);
    return v;
  }
  [[nodiscard]] double frequency_cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < dims; ++d) v *= frequency_step(d);
    return v;
  }
  [[nodiscard]] double position(int d, std::size_t i) const {
    return -half_length[d] + static_cast<double>(i) * spacing(d);
  }
  /// Signed frequency index of storage slot m.
  [[nodiscard]] long signed_mode(int d, std::size_t m) const {
    const auto n = static_cast<long>(points[d]);
    const auto mm = static_cast<long>(m);
    return mm < n / 2 ? mm : mm - n;
  }
  [[nodiscard]] double frequency(int d, std::size_t m) const {
    return frequency_step(d) * static_cast<double>(signed_mode(d, m));
  }
  /// Largest |k| on axis d (the Nyquist magnitude).
  [[nodiscard]] double max_frequency(int d) const {
    return frequency_step(d) * static_cast<double>(points[d] / 2);
  }
  /// Minimum-image displacement on axis d, mapped into [-L, L).
  [[nodiscard]] double wrap(int d, double dx) const {
    const double period = 2.0 * half_length[d];
    double r = std::fmod(dx + half_length[d], period);
    if (r < 0) r += period;
    return r - half_length[d];
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    if (a.dims != b.dims) return false;
    for (int d = 0; d < a.dims; ++d) {
      if (a.points[d] != b.points[d] || a.half_length[d] != b.half_length[d]) return false;
    }
    return true;
  }
};

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t nearest_power_of_two(std::size_t n) {
  std::size_t lo = 1;
  while (lo * 2 <= n) lo *= 2;
  const std::size_t hi = lo * 2;
  return (n - lo <= hi - n) ? lo : hi;
}

}  // namespace detail

inline Grid make_grid(int dims, std::span<const std::size_t> points, std::span<const double> half_length,
                      std::size_t point_budget = kDefaultPointBudget) {
  if (dims < 1 || dims > 3) {
    throw ConfigError("grid: dims must be 1, 2 or 3 (got " + std::to_string(dims) + ")");
  }
  if (points.size() < static_cast<std::size_t>(dims) || half_length.size() < static_cast<std::size_t>(dims)) {
    throw ConfigError("grid: need one point count and one half length per axis");
  }
  Grid g;
  g.dims = dims;
  std::size_t total = 1;
  for (int d = 0; d < dims; ++d) {
    const std::size_t n = points[d];
    if (n < 16 || !detail::is_power_of_two(n)) {
      std::ostringstream os;
      os << "grid: axis " << d << " has " << n << " points; need a power of two >= 16";
      if (n >= 16) os << " (try " << detail::nearest_power_of_two(n) << ")";
      else os << " (try 16)";
      throw ConfigError(os.str());
    }
    if (!(half_length[d] > 0.0) || !std::isfinite(half_length[d])) {
      throw ConfigError("grid: axis " + std::to_string(d) + " half length must be positive");
    }
    if (total > point_budget / n) {
      std::ostringstream os;
      os << "grid: point budget " << point_budget << " exceeded at axis " << d << " (" << n << " points)";
      throw ConfigError(os.str());
    }
    total *= n;
    g.points[d] = n;
    g.half_length[d] = half_length[d];
  }
  return g;
}

/// Same point count and half length on every axis.
inline Grid make_grid(int dims, std::size_t points_per_dim, double half_length,
                      std::size_t point_budget = kDefaultPointBudget) {
  const std::array<std::size_t, 3> n{points_per_dim, points_per_dim, points_per_dim};
  const std::array<double, 3> l{half_length, half_length, half_length};
  return make_grid(dims, n, l, point_budget);
}

/// Calls f(flat_index, x) for every position sample, x padded with zeros past dims.
template <class F>
void for_each_position(const Grid& g, F&& f) {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  std::size_t flat = 0;
  const std::size_t n0 = g.points[0];
  const std::size_t n1 = g.dims > 1 ? g.points[1] : 1;
  const std::size_t n2 = g.dims > 2 ? g.points[2] : 1;
  for (std::size_t i = 0; i < n0; ++i) {
    x[0] = g.position(0, i);
    for (std::size_t j = 0; j < n1; ++j) {
      if (g.dims > 1) x[1] = g.position(1, j);
      for (std::size_t k = 0; k < n2; ++k) {
        if (g.dims > 2) x[2] = g.position(2, k);
        f(flat++, x);
      }
    }
  }
}

/// Calls f(flat_index, k) for every frequency slot (FFT ordering).
template <class F>
void for_each_frequency(const Grid& g, F&& f) {
  std::array<double, 3> q{0.0, 0.0, 0.0};
  std::size_t flat = 0;
  const std::size_t n0 = g.points[0];
  const std::size_t n1 = g.dims > 1 ? g.points[1] : 1;
  const std::size_t n2 = g.dims > 2 ? g.points[2] : 1;
  for (std::size_t i = 0; i < n0; ++i) {
    q[0] = g.frequency(0, i);
    for (std::size_t j = 0; j < n1; ++j) {
      if (g.dims > 1) q[1] = g.frequency(1, j);
      for (std::size_t k = 0; k < n2; ++k) {
        if (g.dims > 2) q[2] = g.frequency(2, k);
        f(flat++, q);
      }
    }
  }
}

inline double euclidean(const std::array<double, 3>& v, int dims) {
  double s = 0.0;
  for (int d = 0; d < dims; ++d) s += v[d] * v[d];
  return std::sqrt(s);
}

}  // namespace freechan
