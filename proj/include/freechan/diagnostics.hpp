#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "freechan/cutoffs.hpp"
#include "freechan/errors.hpp"
#include "freechan/field.hpp"
#include "freechan/interaction.hpp"
#include "freechan/phase_space.hpp"
#include "freechan/propagators.hpp"

namespace freechan {

// ---------------------------------------------------------------------------
// Observable series

struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> derivative;  // centered differences, one-sided at the ends
  std::vector<double> c_p;         // sign-definite part, when available
  std::vector<double> g;           // remainder, when available
};

namespace detail {

inline std::vector<double> centered_derivative(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t n = t.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  d[0] = (v[1] - v[0]) / (t[1] - t[0]);
  d[n - 1] = (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
  return d;
}

inline double real_expectation(const WaveFunction& u, const WaveFunction& bu, double tol = 1e-10) {
  const cplx e = inner_product(u, bu);
  const double scale = std::max(1.0, std::norm(norm(u)));
  if (std::abs(e.imag()) > tol * scale) {
    throw ConsistencyError("expectation of a self-adjoint observable has imaginary part " + std::to_string(e.imag()));
  }
  return e.real();
}

}  // namespace detail

/// Observable B(t) acting on a state.
using ObservableFn = std::function<WaveFunction(const WaveFunction&, double t)>;

/// (psi(t), B(t) psi(t)) over a list of states; each state carries its time.
inline ObservableSeries prob_series(const std::vector<WaveFunction>& states, const ObservableFn& b) {
  ObservableSeries s;
  for (const auto& w : states) {
    if (!s.times.empty() && !(w.time > s.times.back())) throw UsageError("prob_series: times must increase");
    s.times.push_back(w.time);
    s.values.push_back(detail::real_expectation(w, b(w, w.time)));
  }
  s.derivative = detail::centered_derivative(s.times, s.values);
  return s;
}

/// The moving projector as an observable.
inline ObservableFn moving_cutoff_observable(double alpha, const Dispersion& disp = {}) {
  return [alpha, disp](const WaveFunction& w, double t) { return apply_moving_cutoff(w, t, alpha, disp); };
}

/// free_flow(phi0, t) at each t, for Heisenberg-derivative checks.
inline std::vector<WaveFunction> free_states(const WaveFunction& phi0, const std::vector<double>& times,
                                             const Dispersion& disp = {}) {
  std::vector<WaveFunction> out;
  for (double t : times) out.push_back(free_flow(phi0, t - phi0.time, disp));
  return out;
}

enum class RpresObservable { position_cutoff, momentum_cutoff };

/// Step observer for the relative estimate on phi(s) = e^{isH0} <P>^a psi(s):
/// records <B>_s, c_p(s) = (phi, dB/ds phi) and the analytic remainder.
class RpresAccumulator {
 public:
  RpresAccumulator(ProjectorParams p, const Interaction& in, RpresObservable kind = RpresObservable::position_cutoff,
                   Dispersion disp = {}, double start = 1.0)
      : p_(p), in_(&in), kind_(kind), disp_(std::move(disp)), start_(start) {}

  void operator()(const WaveFunction& psi_in) {
    const double s = psi_in.time;
    if (s < start_ - 1e-9) return;
    const WaveFunction psi = psi_in.in_position() ? psi_in : spectral_transform(psi_in, Direction::to_position);
    const Grid& g = psi.grid;
    WaveFunction phi = apply_sobolev_weight(psi, p_.a, +1);
    phi = asymptotic_profile(std::move(phi), s, disp_);
    const CutoffSpec spec =
        kind_ == RpresObservable::position_cutoff ? position_cutoff_spec(p_.alpha) : momentum_cutoff_spec(p_.b);
    const WaveFunction bphi = apply_cutoff(phi, spec, s);
    const RealField dfield = cutoff_time_derivative_field(g, spec, s);
    const WaveFunction dphi = apply_multiplier(phi, std::span<const double>(dfield), spec.space());
    times_.push_back(s);
    b_.push_back(detail::real_expectation(phi, bphi));
    cp_.push_back(detail::real_expectation(phi, dphi));
    double gval = 0.0;
    double in_norm = 0.0;
    if (!in_->empty()) {
      WaveFunction v = psi;
      const ComplexField w = interaction_eval(*in_, psi, s);
      for (std::size_t i = 0; i < w.size(); ++i) v.values[i] *= w[i];
      v = apply_sobolev_weight(std::move(v), p_.a, +1);
      v = asymptotic_profile(std::move(v), s, disp_);
      v = cplx{0.0, -1.0} * std::move(v);
      gval = 2.0 * inner_product(bphi, v).real();
      in_norm = norm(apply_cutoff(v, spec, s));
    }
    g_exact_.push_back(gval);
    in_norms_.push_back(in_norm);
    weighted_norm_sup_ = std::max(weighted_norm_sup_, norm(phi));
  }

  [[nodiscard]] ObservableSeries series() const {
    ObservableSeries o;
    o.times = times_;
    o.values = b_;
    o.derivative = detail::centered_derivative(times_, b_);
    o.c_p = cp_;
    o.g = g_exact_;
    return o;
  }
  [[nodiscard]] const std::vector<double>& interaction_norms() const { return in_norms_; }
  [[nodiscard]] double weighted_norm_sup() const { return weighted_norm_sup_; }

 private:
  ProjectorParams p_;
  const Interaction* in_;
  RpresObservable kind_;
  Dispersion disp_;
  double start_;
  std::vector<double> times_, b_, cp_, g_exact_, in_norms_;
  double weighted_norm_sup_ = 0.0;
};

struct RpresBudget {
  double int_c_p = 0;
  double sup_b = 0;
  double g_l1 = 0;
  double g_l1_exact = 0;   // L1 norm of the analytic remainder
  double g_bound = 0;      // 2 sup||<P>^a psi|| int ||psi_in||
  double min_c_p = 0;
  double slack = 0;        // (sup_b + g_l1) - int_c_p, relative to sup_b
  bool pass = false;
};

/// Splits d<B>/dt into c_p and g = d<B>/dt - c_p per solver interval and
/// checks int c_p <= sup <B> + ||g||_1 within the relative tolerance.
inline RpresBudget rpres_decompose(const ObservableSeries& s, const std::vector<double>& interaction_norms = {},
                                   double weighted_norm_sup = 0.0, double tol = 1e-3) {
  if (s.c_p.size() != s.times.size()) throw UsageError("rpres_decompose: series has no c_p part");
  RpresBudget r;
  r.min_c_p = s.c_p.empty() ? 0.0 : *std::min_element(s.c_p.begin(), s.c_p.end());
  for (double v : s.values) r.sup_b = std::max(r.sup_b, std::abs(v));
  double in_int = 0.0;
  for (std::size_t i = 0; i + 1 < s.times.size(); ++i) {
    const double h = s.times[i + 1] - s.times[i];
    const double cp = 0.5 * (s.c_p[i] + s.c_p[i + 1]);
    r.int_c_p += h * cp;
    r.g_l1 += std::abs((s.values[i + 1] - s.values[i]) - h * cp);
    if (s.g.size() == s.times.size()) r.g_l1_exact += h * 0.5 * (std::abs(s.g[i]) + std::abs(s.g[i + 1]));
    if (interaction_norms.size() == s.times.size()) in_int += h * 0.5 * (interaction_norms[i] + interaction_norms[i + 1]);
  }
  r.g_bound = 2.0 * weighted_norm_sup * in_int;
  const double scale = std::max(r.sup_b, 1e-300);
  r.slack = (r.sup_b + r.g_l1 - r.int_c_p) / scale;
  r.pass = r.int_c_p <= (r.sup_b + r.g_l1) * (1.0 + tol) && r.min_c_p >= -1e-10;
  return r;
}

// ---------------------------------------------------------------------------
// Fits

struct FitResult {
  double slope = 0;
  double intercept = 0;
  double window_lo = 0;
  double window_hi = 0;
  double rms = 0;
  std::size_t points = 0;
};

/// Least-squares slope of log(value) against log(time) inside [lo, hi].
inline FitResult exponent_fit(const std::vector<double>& times, const std::vector<double>& values, double lo, double hi) {
  if (times.size() != values.size()) throw UsageError("exponent_fit: length mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < lo * (1 - 1e-12) || times[i] > hi * (1 + 1e-12)) continue;
    if (!(times[i] > 0.0) || !(values[i] > 0.0)) throw DomainError("exponent_fit: values and times must be positive");
    x.push_back(std::log(times[i]));
    y.push_back(std::log(values[i]));
  }
  if (x.size() < 5) throw DomainError("exponent_fit: fewer than 5 points in the window");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  FitResult f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss += e * e;
  }
  f.rms = std::sqrt(ss / n);
  f.window_lo = lo;
  f.window_hi = hi;
  f.points = x.size();
  return f;
}

/// Log-spaced subsample (about per_octave points per doubling) of a dense series.
inline void log_subsample(const std::vector<double>& t, const std::vector<double>& v, double lo, double hi,
                          int per_octave, std::vector<double>& t_out, std::vector<double>& v_out) {
  t_out.clear();
  v_out.clear();
  double next = lo;
  const double ratio = std::pow(2.0, 1.0 / per_octave);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] + 1e-12 >= next && t[i] <= hi * (1 + 1e-12)) {
      t_out.push_back(t[i]);
      v_out.push_back(v[i]);
      next = t[i] * ratio * (1 - 1e-9);
    }
  }
}

// ---------------------------------------------------------------------------
// Operator pipelines and norm estimation

/// One multiplier stage of a linear pipeline.
struct Stage {
  Space space = Space::position;
  ComplexField field;
};

/// Composition of multipliers, applied first to last.
struct Pipeline {
  std::vector<Stage> stages;

  Pipeline& then(Space s, ComplexField f) {
    stages.push_back({s, std::move(f)});
    return *this;
  }
  Pipeline& then(Space s, const RealField& f) { return then(s, ComplexField(f.begin(), f.end())); }

  [[nodiscard]] WaveFunction apply(WaveFunction w) const {
    for (const auto& st : stages) w = apply_multiplier(std::move(w), std::span<const cplx>(st.field), st.space);
    return w;
  }
  [[nodiscard]] Pipeline adjoint() const {
    Pipeline a;
    for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
      ComplexField f(it->field.size());
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::conj(it->field[i]);
      a.stages.push_back({it->space, std::move(f)});
    }
    return a;
  }
};

/// Linear combination sum_i c_i A_i of pipelines.
struct LinearOperator {
  std::vector<std::pair<cplx, Pipeline>> terms;

  LinearOperator() = default;
  LinearOperator(Pipeline p) { terms.emplace_back(cplx{1.0, 0.0}, std::move(p)); }  // NOLINT

  [[nodiscard]] WaveFunction apply(const WaveFunction& w) const {
    WaveFunction out = WaveFunction::zeros(w.grid, w.time);
    out.representation = w.representation;
    for (const auto& [c, p] : terms) {
      const WaveFunction r = p.apply(w);
      for (std::size_t i = 0; i < r.values.size(); ++i) out.values[i] += c * r.values[i];
    }
    return out;
  }
  [[nodiscard]] LinearOperator adjoint() const {
    LinearOperator a;
    for (const auto& [c, p] : terms) a.terms.emplace_back(std::conj(c), p.adjoint());
    return a;
  }
};

inline LinearOperator operator-(LinearOperator a, const LinearOperator& b) {
  for (const auto& [c, p] : b.terms) a.terms.emplace_back(-c, p);
  return a;
}

inline LinearOperator operator*(cplx c, LinearOperator a) {
  for (auto& t : a.terms) t.first *= c;
  return a;
}

struct NormEstimate {
  double value = 0;
  bool converged = false;
  int iterations = 0;
};

/// sqrt of the top eigenvalue of A*A by power iteration from a seeded random
/// start. Stops when the Rayleigh quotient changes by less than tol
/// (relative); otherwise the value is a lower bound and converged is false.
inline NormEstimate operator_norm_estimate(const LinearOperator& a, const Grid& g, int iterations = 50, double tol = 1e-4,
                                           std::uint64_t seed = 1) {
  const LinearOperator ah = a.adjoint();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  WaveFunction v = WaveFunction::zeros(g);
  for (auto& x : v.values) x = {nd(rng), nd(rng)};
  double nv = norm(v);
  for (auto& x : v.values) x /= nv;
  NormEstimate est;
  double prev = -1.0;
  for (int it = 1; it <= iterations; ++it) {
    const WaveFunction av = a.apply(v);
    const double lam = std::norm(norm(av));
    WaveFunction w = ah.apply(av);
    est.iterations = it;
    est.value = std::sqrt(std::max(lam, 0.0));
    const double nw = norm(w);
    if (nw == 0.0) {
      est.converged = true;
      break;
    }
    if (prev >= 0.0 && std::abs(lam - prev) <= tol * lam) {
      est.converged = true;
      break;
    }
    prev = lam;
    for (auto& x : w.values) x /= nw;
    v = std::move(w);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Velocity bounds

enum class VelocitySide { fast, slow };  // F1(... > 1/50) with e^{iaH0}, or F1(... <= 1/50) with e^{-iaH0}

struct VelocityCell {
  double t = 0;
  double a = 0;
  double scale = 0;  // t^{1/2+eps} + sqrt(a)
  double norm = 0;
  bool converged = false;
};

struct VelocityScanOptions {
  double epsilon = 0.1;
  double delta = 3.0;
  int direction = +1;
  VelocitySide side = VelocitySide::fast;
  int axis = 0;
  double threshold = 1.0 / 50.0;
  int iterations = 200;
  double tol = 1e-6;
  std::uint64_t seed = 7;
};

/// F2(+-(x - c)_j / t^{1/2+eps} > 1) F1(+-t^{1/2-eps} P_j ><= 1/50) e^{+-iaH0} <(x - c)_j>^{-delta},
/// with the spatial factors centered at c (c = 0 for the plain operator).
inline LinearOperator velocity_operator(const Grid& g, double t, double a, const VelocityScanOptions& o,
                                        const Point& center = {0.0, 0.0, 0.0}, const Dispersion& disp = {}) {
  const int j = o.axis;
  const double s = std::pow(t, 0.5 + o.epsilon);
  const double m = std::pow(t, 0.5 - o.epsilon) / o.threshold;
  const RealField weight = sample_position(g, [&](const Point& x) {
    const double y = g.wrap(j, x[j] - center[j]);
    return std::pow(1.0 + y * y, -o.delta / 2.0);
  });
  const double sgn = o.side == VelocitySide::fast ? 1.0 : -1.0;
  ComplexField flow(g.size());
  for_each_frequency(g, [&](std::size_t i, const Point& k) { flow[i] = std::polar(1.0, sgn * a * disp.symbol(k)); });
  const RealField f1 = sample_frequency(g, [&](const Point& k) {
    const double c = chi_eval(o.direction * m * k[j]);
    return o.side == VelocitySide::fast ? c : 1.0 - c;
  });
  const RealField f2 = sample_position(g, [&](const Point& x) { return chi_eval(o.direction * g.wrap(j, x[j] - center[j]) / s); });
  Pipeline p;
  p.then(Space::position, weight);
  ComplexField mid(g.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = flow[i] * f1[i];
  p.then(Space::frequency, std::move(mid));
  p.then(Space::position, f2);
  return p;
}

inline std::vector<VelocityCell> velocity_bound_scan(const Grid& g, const std::vector<double>& ts,
                                                     const std::vector<double>& as, const VelocityScanOptions& o,
                                                     const Dispersion& disp = {}) {
  std::vector<VelocityCell> out;
  for (double t : ts) {
    for (double a : as) {
      const NormEstimate e = operator_norm_estimate(velocity_operator(g, t, a, o, {0.0, 0.0, 0.0}, disp), g, o.iterations,
                                                    o.tol, o.seed);
      out.push_back({t, a, std::pow(t, 0.5 + o.epsilon) + std::sqrt(a), e.value, e.converged});
    }
  }
  return out;
}

/// max over probes of ||A_c T f - T A f|| / ||f||, T the translation by c = t v
/// and A_c the operator centered at c: the moving-frame equivalence.
inline double boosted_equivalence_error(const Grid& g, double t, double a, const Point& v, const VelocityScanOptions& o,
                                        int probes = 3, const Dispersion& disp = {}) {
  Point c{0.0, 0.0, 0.0};
  for (int d = 0; d < g.dims; ++d) c[d] = t * v[d];
  const LinearOperator a0 = velocity_operator(g, t, a, o, {0.0, 0.0, 0.0}, disp);
  const LinearOperator ac = velocity_operator(g, t, a, o, c, disp);
  std::mt19937_64 rng(o.seed + 11);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    WaveFunction f = WaveFunction::zeros(g, t);
    for (auto& x : f.values) x = {nd(rng), nd(rng)};
    const WaveFunction lhs = ac.apply(translate_boost(f, v, -t));
    const WaveFunction rhs = translate_boost(a0.apply(f), v, -t);
    worst = std::max(worst, distance(lhs, rhs) / norm(f));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Commutators

struct CommutatorCell {
  double t = 0;
  double norm = 0;
  bool converged = false;
};

/// [h(|x|/t^alpha), f(t^b |P|)] with h = 1 - chi and f = chi (or f = 1).
inline LinearOperator commutator_operator(const Grid& g, double t, double alpha, double b, bool f_identity = false) {
  const RealField h = cutoff_field(g, position_cutoff_spec(alpha), t);
  const RealField f = f_identity ? RealField(g.size(), 1.0) : cutoff_field(g, momentum_cutoff_spec(b), t);
  Pipeline hf;
  hf.then(Space::frequency, f).then(Space::position, h);
  Pipeline fh;
  fh.then(Space::position, h).then(Space::frequency, f);
  return LinearOperator(hf) - LinearOperator(fh);
}

inline std::vector<CommutatorCell> commutator_scan(const Grid& g, const std::vector<double>& ts, double alpha, double b,
                                                   int iterations = 400, double tol = 1e-6, std::uint64_t seed = 3,
                                                   bool f_identity = false) {
  std::vector<CommutatorCell> out;
  for (double t : ts) {
    const NormEstimate e = operator_norm_estimate(commutator_operator(g, t, alpha, b, f_identity), g, iterations, tol, seed);
    out.push_back({t, e.value, e.converged});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Morawetz observable

/// g(x) = x/|x| for |x| >= r, x (3 - |x|^2/r^2) / (2r) inside (C^1 at |x| = r).
inline Point morawetz_field(const Point& x, int dims, double r) {
  const double rho = euclidean(x, dims);
  Point out{0.0, 0.0, 0.0};
  const double f = rho >= r ? 1.0 / rho : (3.0 - rho * rho / (r * r)) / (2.0 * r);
  for (int d = 0; d < dims; ++d) out[d] = x[d] * f;
  return out;
}

namespace detail {

// -i d/dx_d applied spectrally.
inline WaveFunction momentum_component(const WaveFunction& u, int d) {
  ComplexField k(u.grid.size());
  for_each_frequency(u.grid, [&](std::size_t i, const Point& q) { k[i] = q[d]; });
  return apply_multiplier(u, std::span<const cplx>(k), Space::frequency);
}

}  // namespace detail

/// A_gamma u = (g.P u + P.(g u)) / 2.
inline WaveFunction morawetz_apply(const WaveFunction& u, double r) {
  detail::require_position(u, "morawetz_apply");
  const Grid& gr = u.grid;
  WaveFunction out = WaveFunction::zeros(gr, u.time);
  for (int d = 0; d < gr.dims; ++d) {
    const RealField gd = sample_position(gr, [&](const Point& x) {
      Point y{0.0, 0.0, 0.0};
      for (int e = 0; e < gr.dims; ++e) y[e] = gr.wrap(e, x[e]);
      return morawetz_field(y, gr.dims, r)[d];
    });
    const WaveFunction pu = detail::momentum_component(u, d);
    WaveFunction gu = u;
    for (std::size_t i = 0; i < gd.size(); ++i) gu.values[i] *= gd[i];
    const WaveFunction pgu = detail::momentum_component(gu, d);
    for (std::size_t i = 0; i < gd.size(); ++i) out.values[i] += 0.5 * (gd[i] * pu.values[i] + pgu.values[i]);
  }
  return out;
}

/// <chi(|x|/t^alpha) A_gamma chi(|x|/t^alpha)> over the given states.
inline ObservableSeries morawetz_series(const std::vector<WaveFunction>& states, double alpha = 1.0 / 3.0,
                                        double radius = 2.0) {
  return prob_series(states, [alpha, radius](const WaveFunction& w, double t) {
    const WaveFunction u = apply_cutoff(w, position_cutoff_spec(alpha, true), t);
    return apply_cutoff(morawetz_apply(u, radius), position_cutoff_spec(alpha, true), t);
  });
}

}  // namespace freechan
