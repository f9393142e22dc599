#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "freechan/cutoffs.hpp"
#include "freechan/errors.hpp"
#include "freechan/field.hpp"
#include "freechan/interaction.hpp"
#include "freechan/phase_space.hpp"
#include "freechan/propagators.hpp"

namespace freechan {

enum class InteractionVariant { psi_in, psi_in1, psi_in2 };

namespace detail {

inline constexpr cplx kMinusI{0.0, -1.0};

// e^{isH0} m(k) applied to position samples, one transform pair.
template <class M>
WaveFunction profile_multiply(WaveFunction w, double s, const Dispersion& disp, M&& m) {
  const auto ph = shared_flow_phase(w.grid, -s, disp);
  ComplexField f(w.grid.size());
  for_each_frequency(w.grid, [&](std::size_t i, const Point& k) { f[i] = m(k) * (*ph)[i]; });
  multiply_in_frequency(w.grid, w.values, f);
  return w;
}

inline double bracket_pow(const Point& k, double e) {
  return std::pow(1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2], e);
}

inline double kabs(const Point& k) { return std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]); }

inline void multiply(WaveFunction& w, const RealField& f) {
  for (std::size_t i = 0; i < f.size(); ++i) w.values[i] *= f[i];
}

inline void require_time(double t, const char* op) {
  if (t < 1.0 - 1e-12) throw DomainError(std::string(op) + ": requires t >= 1");
}

inline bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace detail

/// Omega*(t) psi(0) in profile form, from the snapshot psi(t) (time stamp t).
inline WaveFunction omega_t(const WaveFunction& psi_t, const ProjectorParams& p, const Dispersion& disp = {}) {
  const double t = psi_t.time;
  detail::require_time(t, "omega_t");
  WaveFunction w = psi_t.in_position() ? psi_t : spectral_transform(psi_t, Direction::to_position);
  if (p.b > 0.0) {
    const double sb = std::pow(t, p.b);
    w = detail::profile_multiply(std::move(w), t, disp, [&](const Point& k) { return chi_eval(sb * detail::kabs(k)); });
    detail::multiply(w, cutoff_field(w.grid, position_cutoff_spec(p.alpha), t));
  } else {
    w = detail::profile_multiply(std::move(w), t, disp, [&](const Point& k) { return detail::bracket_pow(k, p.a / 2); });
    detail::multiply(w, cutoff_field(w.grid, position_cutoff_spec(p.alpha), t));
    w = apply_sobolev_weight(std::move(w), p.a, -1);
  }
  w.time = 0.0;
  return w;
}

/// Integrand of the Cook interaction integral at time psi_t.time, with the (-i).
inline WaveFunction interaction_term(const WaveFunction& psi_t, std::span<const cplx> v, const ProjectorParams& p,
                                     InteractionVariant variant, const Dispersion& disp = {}) {
  const double t = psi_t.time;
  detail::require_time(t, "interaction_term");
  WaveFunction w = psi_t.in_position() ? psi_t : spectral_transform(psi_t, Direction::to_position);
  w = apply_multiplier(std::move(w), v, Space::position);
  const RealField fc = cutoff_field(w.grid, position_cutoff_spec(p.alpha), t);
  const double sb = std::pow(t, p.b);
  switch (variant) {
    case InteractionVariant::psi_in:
      w = detail::profile_multiply(std::move(w), t, disp, [&](const Point& k) { return detail::bracket_pow(k, p.a / 2); });
      detail::multiply(w, fc);
      w = apply_sobolev_weight(std::move(w), p.a, -1);
      break;
    case InteractionVariant::psi_in1:
      w = detail::profile_multiply(std::move(w), t, disp, [&](const Point& k) { return chi_eval(sb * detail::kabs(k)); });
      detail::multiply(w, fc);
      break;
    case InteractionVariant::psi_in2:
      w = detail::profile_multiply(std::move(w), t, disp, [](const Point&) { return 1.0; });
      detail::multiply(w, fc);
      w = apply_momentum_cutoff(std::move(w), t, p.b);
      break;
  }
  for (auto& x : w.values) x *= detail::kMinusI;
  w.time = 0.0;
  return w;
}

struct CookPoint {
  double time = 0;
  WaveFunction omega;
  WaveFunction psi_p;      // transport part (both momentum and position terms when b > 0)
  WaveFunction int_psi_in;
  double residual = 0;
};

struct CookSeries {
  ProjectorParams params;
  WaveFunction omega_at_1;
  std::vector<CookPoint> points;
  std::vector<double> step_times;
  std::vector<double> psi_in_norms;  // H^a norm of the interaction integrand per step
};

/// Step observer accumulating the Cook expansion
///   Omega(t) = Omega(1) + psi_p(t) + int_1^t psi_in
/// by trapezoidal quadrature on the solver steps. The start time must be a
/// solver step (include it in the schedule). For b > 0 the interaction part
/// is psi_in1.
class CookAccumulator {
 public:
  CookAccumulator(ProjectorParams p, const Interaction& in, std::vector<double> record_times, Dispersion disp = {},
                  double start = 1.0)
      : p_(p), in_(&in), record_(std::move(record_times)), disp_(std::move(disp)), start_(start) {
    series_.params = p_;
  }

  void operator()(const WaveFunction& psi) {
    const double s = psi.time;
    if (s < start_ - 1e-9) return;
    if (!started_ && !detail::near(s, start_)) {
      throw UsageError("cook: start time is not a solver step; add it to the schedule");
    }
    Integrands cur = integrands(psi);
    if (!started_) {
      started_ = true;
      series_.omega_at_1 = finish(omega_t(psi, p_, disp_), false);
      acc_p_ = WaveFunction::zeros(psi.grid);
      acc_in_ = WaveFunction::zeros(psi.grid);
    } else {
      const double h = (s - prev_time_) / 2.0;
      for (std::size_t i = 0; i < cur.p.values.size(); ++i) {
        acc_p_.values[i] += h * (prev_.p.values[i] + cur.p.values[i]);
        acc_in_.values[i] += h * (prev_.in.values[i] + cur.in.values[i]);
      }
    }
    series_.step_times.push_back(s);
    series_.psi_in_norms.push_back(norm(cur.in));
    for (double r : record_) {
      if (detail::near(s, r)) {
        CookPoint pt;
        pt.time = s;
        pt.omega = finish(omega_t(psi, p_, disp_), false);
        pt.psi_p = finish(acc_p_, true);
        pt.int_psi_in = finish(acc_in_, true);
        WaveFunction rec = pt.omega - series_.omega_at_1 - pt.psi_p - pt.int_psi_in;
        pt.residual = norm(rec);
        series_.points.push_back(std::move(pt));
        break;
      }
    }
    prev_ = std::move(cur);
    prev_time_ = s;
  }

  [[nodiscard]] const CookSeries& series() const { return series_; }

 private:
  struct Integrands {
    WaveFunction p;
    WaveFunction in;
  };

  // For b = 0 the integrands are kept before the final <P>^{-a}, which is
  // applied when a point is recorded.
  Integrands integrands(const WaveFunction& psi_in) const {
    const WaveFunction psi = psi_in.in_position() ? psi_in : spectral_transform(psi_in, Direction::to_position);
    const Grid& g = psi.grid;
    const double s = psi.time;
    const CutoffSpec fc_spec = position_cutoff_spec(p_.alpha);
    const RealField fc = cutoff_field(g, fc_spec, s);
    const RealField dfc = cutoff_time_derivative_field(g, fc_spec, s);
    WaveFunction vpsi = psi;
    if (!in_->empty()) {
      const ComplexField w = interaction_eval(*in_, psi, s);
      for (std::size_t i = 0; i < w.size(); ++i) vpsi.values[i] *= w[i];
    }
    Integrands out;
    if (p_.b > 0.0) {
      const double b = p_.b;
      const double sb = std::pow(s, b);
      auto f1 = [&](const Point& k) { return chi_eval(sb * detail::kabs(k)); };
      auto df1 = [&](const Point& k) {
        const double q = detail::kabs(k);
        return chi_prime(sb * q) * b * q * std::pow(s, b - 1.0);
      };
      WaveFunction a = detail::profile_multiply(psi, s, disp_, f1);
      detail::multiply(a, dfc);
      WaveFunction c = detail::profile_multiply(psi, s, disp_, df1);
      detail::multiply(c, fc);
      out.p = a + c;
      out.in = in_->empty() ? WaveFunction::zeros(g) : detail::profile_multiply(vpsi, s, disp_, f1);
      detail::multiply(out.in, fc);
    } else {
      auto wa = [&](const Point& k) { return detail::bracket_pow(k, p_.a / 2); };
      out.p = detail::profile_multiply(psi, s, disp_, wa);
      detail::multiply(out.p, dfc);
      out.in = in_->empty() ? WaveFunction::zeros(g) : detail::profile_multiply(vpsi, s, disp_, wa);
      detail::multiply(out.in, fc);
    }
    for (auto& x : out.in.values) x *= detail::kMinusI;
    out.p.time = out.in.time = 0.0;
    return out;
  }

  WaveFunction finish(WaveFunction w, bool weight) const {
    if (weight && p_.b == 0.0) w = apply_sobolev_weight(std::move(w), p_.a, -1);
    w.time = 0.0;
    return w;
  }

  ProjectorParams p_;
  const Interaction* in_;
  std::vector<double> record_;
  Dispersion disp_;
  double start_;
  bool started_ = false;
  double prev_time_ = 0;
  Integrands prev_;
  WaveFunction acc_p_;
  WaveFunction acc_in_;
  CookSeries series_;
};

struct CookResidual {
  double time = 0;
  double residual = 0;
};

/// ||Omega(t) - Omega(1) - psi_p(t) - int psi_in|| per recorded time.
inline std::vector<CookResidual> cook_reconstruct(const CookSeries& s) {
  if (s.points.empty()) throw UsageError("cook_reconstruct: no recorded points (schedule mismatch)");
  std::vector<CookResidual> out;
  for (const auto& pt : s.points) {
    if (!(pt.omega.grid == s.omega_at_1.grid)) throw UsageError("cook_reconstruct: grid mismatch");
    out.push_back({pt.time, distance(pt.omega, s.omega_at_1 + pt.psi_p + pt.int_psi_in)});
  }
  return out;
}

/// Five fixed probes for weak-limit overlaps.
inline std::vector<WaveFunction> default_probes(const Grid& g) {
  double lmin = g.half_length[0];
  double kmax = g.max_frequency(0);
  for (int d = 1; d < g.dims; ++d) {
    lmin = std::min(lmin, g.half_length[d]);
    kmax = std::min(kmax, g.max_frequency(d));
  }
  auto sig = [&](double s) { return std::clamp(s, 16.0 / kmax, lmin / 8.0); };
  auto at = [&](double c) {
    Point p{0.0, 0.0, 0.0};
    for (int d = 0; d < g.dims; ++d) p[d] = c;
    return p;
  };
  const Point zero{0.0, 0.0, 0.0};
  Point kosc{0.0, 0.0, 0.0};
  kosc[0] = std::min(1.0, kmax / 4);
  return {coherent_state(g, zero, zero, sig(1.0)), coherent_state(g, at(lmin / 8), zero, sig(2.0)),
          coherent_state(g, at(-lmin / 8), zero, sig(4.0)), coherent_state(g, zero, zero, sig(8.0)),
          coherent_state(g, zero, kosc, sig(2.0))};
}

/// prod_j (1 - chi(|x_j - c_j| / s)): the box |x_j - c_j| <= s, smoothed.
inline RealField box_cutoff_bar(const Grid& g, double s, const Point& center = {0.0, 0.0, 0.0}) {
  return sample_position(g, [&](const Point& x) {
    double v = 1.0;
    for (int d = 0; d < g.dims; ++d) v *= 1.0 - chi_eval(std::abs(g.wrap(d, x[d] - center[d])) / s);
    return v;
  });
}

struct ChannelRecord {
  ProjectorParams params;
  double epsilon = 0.1;
  std::vector<double> times;
  std::vector<WaveFunction> omega_snapshots;
  std::vector<double> cauchy_increments;  // ||Omega(t_k) - Omega(t_{k-1})||, first entry 0
  std::optional<CookSeries> cook;
  WaveFunction psi_plus;
  double psi_plus_halfway_change = 0;  // ||Omega(T) - Omega(T/2)||
  std::vector<double> free_part_norms;
  std::vector<double> psi_w_norms;
  std::vector<double> psi_d_norms;
  std::vector<double> psi_w_eps_norms;
  std::vector<double> psi_w_eps_moments;
  std::vector<WaveFunction> weak_parts;      // psi_w, kept when requested
  std::vector<WaveFunction> weak_eps_parts;  // psi_{w,eps}, kept when requested
  std::vector<std::vector<cplx>> weak_overlaps;
  double partition_error = 0;  // max ||free + psi_w - psi|| / ||psi||
  std::vector<std::string> warnings;
};

/// Free / weakly localized splitting over the snapshots with t >= 1.
inline ChannelRecord decompose(const Trajectory& tr, const WaveFunction& psi0, const ProjectorParams& p, double epsilon,
                               const std::vector<WaveFunction>& probes, const Dispersion& disp = {},
                               bool keep_weak_parts = false) {
  ChannelRecord rec;
  rec.params = p;
  rec.epsilon = epsilon;
  rec.warnings = check_params(p, psi0.grid.dims);
  const WaveFunction psi0_pos = psi0.in_position() ? psi0 : spectral_transform(psi0, Direction::to_position);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double t = tr.times[i];
    if (t < 1.0 - 1e-12) continue;
    const WaveFunction& psi = tr.snapshots[i];
    rec.times.push_back(t);
    WaveFunction om = omega_t(psi, p, disp);
    rec.cauchy_increments.push_back(rec.omega_snapshots.empty() ? 0.0 : distance(om, rec.omega_snapshots.back()));
    rec.omega_snapshots.push_back(std::move(om));

    const WaveFunction free_part = apply_moving_cutoff(psi, t, p.alpha, disp, false);
    const WaveFunction psi_w = apply_moving_cutoff(psi, t, p.alpha, disp, true);
    const double pn = norm(psi);
    rec.partition_error = std::max(rec.partition_error, pn > 0 ? distance(free_part + psi_w, psi) / pn : 0.0);
    rec.free_part_norms.push_back(norm(free_part));
    rec.psi_w_norms.push_back(norm(psi_w));

    WaveFunction psi_d = psi - free_flow(psi0_pos, t, disp);
    psi_d.time = t;
    rec.psi_d_norms.push_back(norm(psi_d));
    WaveFunction w_eps = apply_moving_cutoff(psi_d, t, p.alpha, disp, true);
    detail::multiply(w_eps, box_cutoff_bar(psi.grid, std::pow(t, 0.5 + epsilon)));
    rec.psi_w_eps_norms.push_back(norm(w_eps));
    rec.psi_w_eps_moments.push_back(x_moment(w_eps));
    w_eps.time = t;

    const WaveFunction prof_bar = apply_cutoff(asymptotic_profile(psi, t, disp), position_cutoff_spec(p.alpha, true), t);
    std::vector<cplx> ov;
    for (const auto& probe : probes) ov.push_back(inner_product(probe, prof_bar));
    rec.weak_overlaps.push_back(std::move(ov));
    if (keep_weak_parts) {
      rec.weak_parts.push_back(psi_w);
      rec.weak_eps_parts.push_back(std::move(w_eps));
    }
  }
  if (!rec.omega_snapshots.empty()) {
    rec.psi_plus = rec.omega_snapshots.back();
    const double T = rec.times.back();
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
      if (detail::near(rec.times[i], T / 2)) rec.psi_plus_halfway_change = distance(rec.psi_plus, rec.omega_snapshots[i]);
    }
  }
  return rec;
}

/// Step observer for phi_j(t) = int_0^t e^{isH0} V_j(x - s v_j, s) psi(s) ds.
class DuhamelAccumulator {
 public:
  DuhamelAccumulator(const ChargeTransfer& ct, std::vector<double> record_times, Dispersion disp = {})
      : ct_(&ct), record_(std::move(record_times)), disp_(std::move(disp)) {}

  void operator()(const WaveFunction& psi_in) {
    const WaveFunction psi = psi_in.in_position() ? psi_in : spectral_transform(psi_in, Direction::to_position);
    const double s = psi.time;
    std::vector<WaveFunction> cur;
    for (const auto& m : ct_->movers) {
      WaveFunction w = psi;
      const ComplexField v = mover_field(psi.grid, m, s);
      for (std::size_t i = 0; i < v.size(); ++i) w.values[i] *= v[i];
      w = detail::profile_multiply(std::move(w), s, disp_, [](const Point&) { return 1.0; });
      w.time = 0.0;
      cur.push_back(std::move(w));
    }
    if (acc_.empty()) {
      for (const auto& c : cur) acc_.push_back(WaveFunction::zeros(c.grid));
    } else {
      const double h = (s - prev_time_) / 2.0;
      for (std::size_t j = 0; j < cur.size(); ++j) {
        for (std::size_t i = 0; i < cur[j].values.size(); ++i) acc_[j].values[i] += h * (prev_[j].values[i] + cur[j].values[i]);
      }
    }
    for (double r : record_) {
      if (detail::near(s, r)) {
        times_.push_back(s);
        phi_.push_back(acc_);
        break;
      }
    }
    prev_ = std::move(cur);
    prev_time_ = s;
  }

  [[nodiscard]] const std::vector<double>& times() const { return times_; }
  [[nodiscard]] const std::vector<std::vector<WaveFunction>>& phi() const { return phi_; }

 private:
  const ChargeTransfer* ct_;
  std::vector<double> record_;
  Dispersion disp_;
  double prev_time_ = 0;
  std::vector<WaveFunction> prev_;
  std::vector<WaveFunction> acc_;
  std::vector<double> times_;
  std::vector<std::vector<WaveFunction>> phi_;
};

struct ChargeChannelRecord {
  std::vector<double> times;
  std::vector<std::vector<WaveFunction>> phi;            // [time][j]
  std::vector<double> duhamel_residual;                  // ||e^{itH0}psi - psi0 + i sum phi_j|| / ||psi0||
  std::vector<std::vector<std::vector<cplx>>> overlaps;  // R_jl(t) = (phi_j, phi_l)
  std::vector<std::vector<double>> weak_norms;           // ||psi_{w,eps,j}||
  std::vector<std::vector<Point>> weak_centers;          // position mean of psi_{w,eps,j}
  std::vector<std::vector<double>> boosted_moments;      // (u, |x| u), u = e^{itP.v_j} psi_{w,eps,j}
  std::vector<std::vector<WaveFunction>> weak_parts;     // kept when requested
  std::vector<std::string> warnings;
};

/// Per-mover channel pieces from the Duhamel integrals. The pieces
/// d_j = -i phi_j + r / N share the quadrature residual r equally, so that
/// sum_j d_j = e^{itH0} psi(t) - psi0 exactly.
inline ChargeChannelRecord charge_channels(const Trajectory& tr, const ChargeTransfer& ct, const DuhamelAccumulator& acc,
                                           const WaveFunction& psi0, const ProjectorParams& p, double epsilon,
                                           const Dispersion& disp = {}, bool keep_weak_parts = false) {
  if (ct.movers.empty()) throw UsageError("charge_channels: no movers");
  ChargeChannelRecord rec;
  const WaveFunction psi0_pos = psi0.in_position() ? psi0 : spectral_transform(psi0, Direction::to_position);
  const Grid& g = psi0_pos.grid;
  // Bumps closer than the sum of their spreads at t = 0 overlap.
  for (std::size_t j = 0; j < ct.movers.size(); ++j) {
    for (std::size_t l = j + 1; l < ct.movers.size(); ++l) {
      const ComplexField a = mover_field(g, ct.movers[j], 0.0);
      const ComplexField b = mover_field(g, ct.movers[l], 0.0);
      double ab = 0, aa = 0, bb = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        ab += std::abs(a[i]) * std::abs(b[i]);
        aa += std::norm(a[i]);
        bb += std::norm(b[i]);
      }
      if (aa > 0 && bb > 0 && ab / std::sqrt(aa * bb) > 1e-3) {
        rec.warnings.push_back("movers " + std::to_string(j) + " and " + std::to_string(l) + " overlap at t=0");
      }
    }
  }
  const double n0 = norm(psi0_pos);
  const auto nmov = static_cast<double>(ct.movers.size());
  for (std::size_t ti = 0; ti < acc.times().size(); ++ti) {
    const double t = acc.times()[ti];
    const auto& phis = acc.phi()[ti];
    rec.times.push_back(t);
    rec.phi.push_back(phis);
    WaveFunction prof = asymptotic_profile(tr.at(t), t, disp);
    prof.time = 0.0;
    WaveFunction r = prof - psi0_pos;
    for (const auto& ph : phis) r = r - detail::kMinusI * ph;
    rec.duhamel_residual.push_back(n0 > 0 ? norm(r) / n0 : norm(r));

    std::vector<std::vector<cplx>> R(phis.size(), std::vector<cplx>(phis.size()));
    for (std::size_t j = 0; j < phis.size(); ++j) {
      for (std::size_t l = 0; l < phis.size(); ++l) R[j][l] = inner_product(phis[j], phis[l]);
    }
    rec.overlaps.push_back(std::move(R));

    std::vector<double> wn, bm;
    std::vector<Point> wc;
    std::vector<WaveFunction> wp;
    if (t >= 1.0 - 1e-12) {
      const RealField fbar = cutoff_field(g, position_cutoff_spec(p.alpha, true), t);
      const double s = std::pow(t, 0.5 + epsilon);
      for (std::size_t j = 0; j < phis.size(); ++j) {
        WaveFunction d = detail::kMinusI * phis[j];
        for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] += r.values[i] / nmov;
        detail::multiply(d, fbar);
        d = free_flow(std::move(d), t, disp);
        Point c{0.0, 0.0, 0.0};
        for (int k = 0; k < g.dims; ++k) c[k] = t * ct.movers[j].velocity[k];
        detail::multiply(d, box_cutoff_bar(g, s, c));
        d.time = t;
        wn.push_back(norm(d));
        wc.push_back(position_mean(d, c));
        bm.push_back(x_moment(translate_boost(d, ct.movers[j].velocity, t)));
        if (keep_weak_parts) wp.push_back(std::move(d));
      }
    }
    rec.weak_norms.push_back(std::move(wn));
    rec.weak_centers.push_back(std::move(wc));
    rec.boosted_moments.push_back(std::move(bm));
    rec.weak_parts.push_back(std::move(wp));
  }
  return rec;
}

}  // namespace freechan
