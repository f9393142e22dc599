#pragma once

#include <cmath>
#include <optional>

#include "freechan/errors.hpp"
#include "freechan/field.hpp"

namespace freechan {

namespace detail {

inline double bump_g(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
inline double bump_g_prime(double s) { return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0; }

}  // namespace detail

/// Smooth monotone step: 0 for k <= 1/2, 1 for k >= 1.
inline double chi_eval(double k) {
  if (k <= 0.5) return 0.0;
  if (k >= 1.0) return 1.0;
  const double a = detail::bump_g(k - 0.5);
  const double b = detail::bump_g(1.0 - k);
  return a / (a + b);
}

/// Exact derivative of chi_eval.
inline double chi_prime(double k) {
  if (k <= 0.5 || k >= 1.0) return 0.0;
  const double a = detail::bump_g(k - 0.5);
  const double b = detail::bump_g(1.0 - k);
  const double da = detail::bump_g_prime(k - 0.5);
  const double db = -detail::bump_g_prime(1.0 - k);
  const double s = a + b;
  return (da * b - a * db) / (s * s);
}

enum class CutoffKind { Fc_leq, Fc_bar_gt, F1_gt, F1_bar_leq, F2_gt_halfspace, F2_bar_leq_halfspace };

/// Scale of a cutoff: either fixed, or t^exponent when time-scaled.
struct CutoffSpec {
  CutoffKind kind = CutoffKind::Fc_leq;
  double scale = 1.0;
  std::optional<double> time_exponent;
  int axis = 0;
  int sign = +1;

  [[nodiscard]] double scale_at(double t) const {
    return time_exponent ? std::pow(t, *time_exponent) : scale;
  }
  [[nodiscard]] Space space() const {
    return kind == CutoffKind::F1_gt || kind == CutoffKind::F1_bar_leq ? Space::frequency : Space::position;
  }

  static CutoffSpec fixed(CutoffKind k, double a, int axis = 0, int sign = +1) { return {k, a, std::nullopt, axis, sign}; }
  static CutoffSpec scaled(CutoffKind k, double exponent, int axis = 0, int sign = +1) {
    return {k, 1.0, exponent, axis, sign};
  }
};

/// Value of the cutoff at one point (x for position kinds, k for frequency kinds).
inline double cutoff_value(const CutoffSpec& spec, double a, const std::array<double, 3>& p, int dims) {
  switch (spec.kind) {
    case CutoffKind::Fc_leq: return 1.0 - chi_eval(euclidean(p, dims) / a);
    case CutoffKind::Fc_bar_gt: return chi_eval(euclidean(p, dims) / a);
    case CutoffKind::F1_gt: return chi_eval(euclidean(p, dims) / a);
    case CutoffKind::F1_bar_leq: return 1.0 - chi_eval(euclidean(p, dims) / a);
    case CutoffKind::F2_gt_halfspace: return chi_eval(spec.sign * p[spec.axis] / a);
    case CutoffKind::F2_bar_leq_halfspace: return 1.0 - chi_eval(spec.sign * p[spec.axis] / a);
  }
  return 0.0;
}

inline RealField cutoff_field(const Grid& g, const CutoffSpec& spec, double t = 1.0) {
  const double a = spec.scale_at(t);
  if (!(a > 0.0)) throw DomainError("cutoff_field: scale must be positive");
  if ((spec.kind == CutoffKind::F2_gt_halfspace || spec.kind == CutoffKind::F2_bar_leq_halfspace) &&
      (spec.axis < 0 || spec.axis >= g.dims)) {
    throw UsageError("cutoff_field: half-space axis out of range");
  }
  auto f = [&](const std::array<double, 3>& p) { return cutoff_value(spec, a, p, g.dims); };
  return spec.space() == Space::frequency ? sample_frequency(g, f) : sample_position(g, f);
}

/// d/dt of cutoff_field for a time-scaled spec.
inline RealField cutoff_time_derivative_field(const Grid& g, const CutoffSpec& spec, double t) {
  if (!spec.time_exponent) throw UsageError("cutoff_time_derivative_field: spec is not time-scaled");
  const double e = *spec.time_exponent;
  const double a = std::pow(t, e);
  // field = c(|p| / a) with a = t^e, so d/dt = c'(r) * (-e r / t) where r = |p|/a.
  auto f = [&](const std::array<double, 3>& p) {
    double r = 0.0;
    double sgn = 1.0;
    switch (spec.kind) {
      case CutoffKind::Fc_leq:
      case CutoffKind::F1_bar_leq:
        r = euclidean(p, g.dims) / a;
        sgn = -1.0;
        break;
      case CutoffKind::Fc_bar_gt:
      case CutoffKind::F1_gt:
        r = euclidean(p, g.dims) / a;
        break;
      case CutoffKind::F2_gt_halfspace:
        r = spec.sign * p[spec.axis] / a;
        break;
      case CutoffKind::F2_bar_leq_halfspace:
        r = spec.sign * p[spec.axis] / a;
        sgn = -1.0;
        break;
    }
    return sgn * chi_prime(r) * (-e * r / t);
  };
  return spec.space() == Space::frequency ? sample_frequency(g, f) : sample_position(g, f);
}

inline RealField complement(RealField f) {
  for (auto& v : f) v = 1.0 - v;
  return f;
}

}  // namespace freechan
