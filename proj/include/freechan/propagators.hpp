#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "freechan/errors.hpp"
#include "freechan/field.hpp"
#include "freechan/interaction.hpp"

namespace freechan {

/// Real, even dispersion symbol omega(k); H0 = omega(P).
struct Dispersion {
  std::string name = "laplacian";
  std::function<double(const Point&)> symbol = [](const Point& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; };
  double mass = 0.0;

  static Dispersion laplacian() { return {}; }
  /// sqrt(m^2 + |k|^2)
  static Dispersion relativistic(double mass) {
    return {"relativistic", [mass](const Point& k) { return std::sqrt(mass * mass + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]); }, mass};
  }
};

namespace detail {

inline ComplexField flow_phase(const Grid& g, double dt, const Dispersion& disp) {
  ComplexField ph(g.size());
  for_each_frequency(g, [&](std::size_t i, const Point& k) { ph[i] = std::polar(1.0, -dt * disp.symbol(k)); });
  return ph;
}

// Observers evaluate e^{-i s H0} several times per solver step at the same s;
// a few recent tables are kept per thread. Custom symbols are never cached.
inline std::shared_ptr<const ComplexField> shared_flow_phase(const Grid& g, double dt, const Dispersion& disp) {
  struct Entry {
    int dims;
    std::array<std::size_t, 3> points;
    std::array<double, 3> half_length;
    double dt;
    std::string name;
    double mass;
    std::shared_ptr<const ComplexField> phase;
  };
  constexpr std::size_t kEntries = 6;
  constexpr std::size_t kMaxPoints = std::size_t{1} << 22;
  const bool cacheable = (disp.name == "laplacian" || disp.name == "relativistic") && g.size() <= kMaxPoints;
  if (!cacheable) return std::make_shared<const ComplexField>(flow_phase(g, dt, disp));
  thread_local std::deque<Entry> cache;
  for (const auto& e : cache) {
    if (e.dt == dt && e.dims == g.dims && e.points == g.points && e.half_length == g.half_length && e.name == disp.name &&
        e.mass == disp.mass) {
      return e.phase;
    }
  }
  auto ph = std::make_shared<const ComplexField>(flow_phase(g, dt, disp));
  cache.push_front({g.dims, g.points, g.half_length, dt, disp.name, disp.mass, ph});
  if (cache.size() > kEntries) cache.pop_back();
  return ph;
}

}  // namespace detail

/// e^{-i dt H0}; dt < 0 runs the free flow backwards.
inline WaveFunction free_flow(WaveFunction state, double dt, const Dispersion& disp = {}) {
  if (dt != 0.0) {
    const auto ph = detail::shared_flow_phase(state.grid, dt, disp);
    state = apply_multiplier(std::move(state), std::span<const cplx>(*ph), Space::frequency);
  }
  state.time += dt;
  return state;
}

/// e^{i t v.P}: (e^{itv.P} f)(x) = f(x + t v).
inline WaveFunction translate_boost(WaveFunction state, const Point& v, double t) {
  detail::require_position(state, "translate_boost");
  if (t == 0.0) return state;
  ComplexField ph(state.grid.size());
  for_each_frequency(state.grid, [&](std::size_t i, const Point& k) {
    ph[i] = std::polar(1.0, t * (k[0] * v[0] + k[1] * v[1] + k[2] * v[2]));
  });
  return apply_multiplier(std::move(state), std::span<const cplx>(ph), Space::frequency);
}

namespace detail {

inline void potential_phase(WaveFunction& s, const ComplexField& w, double h) {
  const cplx mi{0.0, -h};
  for (std::size_t i = 0; i < w.size(); ++i) s.values[i] *= std::exp(mi * w[i]);
}

}  // namespace detail

/// One Strang step: half potential phase, kinetic flow, half potential phase.
/// Time-dependent potentials are sampled at t + dt/2 when midpoint is set.
inline WaveFunction strang_step(WaveFunction state, const Interaction& in, double t, double dt,
                                const Dispersion& disp = {}, bool midpoint = true) {
  if (!(dt > 0.0)) throw DomainError("strang_step: dt must be positive");
  detail::require_position(state, "strang_step");
  if (in.empty()) {
    state = free_flow(std::move(state), dt, disp);
    state.time = t + dt;
    return state;
  }
  const double t1 = midpoint ? t + dt / 2 : t;
  const double t2 = midpoint ? t + dt / 2 : t + dt;
  const ComplexField w1 = interaction_eval(in, state, t1);
  detail::potential_phase(state, w1, dt / 2);
  state = free_flow(std::move(state), dt, disp);
  const ComplexField w2 = (in.is_linear() && t1 == t2) ? w1 : interaction_eval(in, state, t2);
  detail::potential_phase(state, w2, dt / 2);
  state.time = t + dt;
  return state;
}

struct SplitStepConfig {
  double dt = 1e-2;
  std::vector<double> schedule;  // empty: dyadic {1, 2, 4, ..., T}
  bool midpoint = true;
  double boundary_threshold = 1e-4;
  double boundary_shell = 0.1;
  std::size_t boundary_check_every = 50;
  double sobolev_order = 1.0;
  double sobolev_growth_warning = 10.0;
};

struct SolverLogRow {
  double time = 0, l2 = 0, ha = 0, drift = 0, boundary_mass = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<WaveFunction> snapshots;
  std::vector<SolverLogRow> log;
  double dt = 0;
  int splitting_order = 2;
  std::string status = "ok";
  std::string diagnostic;
  std::vector<std::string> warnings;

  [[nodiscard]] bool aborted() const { return status != "ok"; }
  [[nodiscard]] const WaveFunction& at(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return snapshots[i];
    }
    throw UsageError("trajectory: no snapshot at requested time");
  }
};

/// {1, 2, 4, ...} up to T, with T appended if it is not a power of two.
inline std::vector<double> dyadic_schedule(double T, double first = 1.0) {
  std::vector<double> s;
  for (double t = first; t <= T * (1 + 1e-12); t *= 2) s.push_back(t);
  if (s.empty() || std::abs(s.back() - T) > 1e-12 * T) s.push_back(T);
  return s;
}

/// Called with psi(s) at the start time and after every solver step.
using StepObserver = std::function<void(const WaveFunction&)>;

inline Trajectory evolve(WaveFunction psi0, const Interaction& in, const SplitStepConfig& cfg, double T,
                         const StepObserver& observer = nullptr, const Dispersion& disp = {}) {
  if (!(cfg.dt > 0.0)) throw ConfigError("evolve: dt must be positive");
  if (!psi0.in_position()) psi0 = spectral_transform(std::move(psi0), Direction::to_position);
  std::vector<double> sched = cfg.schedule.empty() ? dyadic_schedule(T) : cfg.schedule;
  std::sort(sched.begin(), sched.end());
  sched.erase(std::unique(sched.begin(), sched.end()), sched.end());
  const double start = psi0.time;
  for (double s : sched) {
    if (s < start - 1e-12 || s > T * (1 + 1e-12)) throw ConfigError("evolve: schedule time outside [start, T]");
  }

  Trajectory tr;
  tr.dt = cfg.dt;
  const double l2_0 = norm(psi0);
  const double ha_0 = norm(psi0, NormSpec::Ha(cfg.sobolev_order));
  bool ha_warned = false;

  auto record = [&](const WaveFunction& w) {
    SolverLogRow row;
    row.time = w.time;
    row.l2 = norm(w);
    row.ha = norm(w, NormSpec::Ha(cfg.sobolev_order));
    row.drift = l2_0 > 0 ? std::abs(row.l2 - l2_0) / l2_0 : 0.0;
    row.boundary_mass = boundary_mass_fraction(w, cfg.boundary_shell);
    tr.log.push_back(row);
    tr.times.push_back(w.time);
    tr.snapshots.push_back(w);
    if (!ha_warned && ha_0 > 0 && row.ha > cfg.sobolev_growth_warning * ha_0) {
      std::ostringstream os;
      os << "H^" << cfg.sobolev_order << " norm grew by factor " << row.ha / ha_0 << " by t=" << w.time;
      tr.warnings.push_back(os.str());
      ha_warned = true;
    }
    return row.boundary_mass;
  };
  auto abort_on = [&](double bm, double t) {
    if (bm > cfg.boundary_threshold) {
      std::ostringstream os;
      os << "boundary mass " << bm << " exceeds threshold " << cfg.boundary_threshold << " at t=" << t;
      tr.status = "aborted";
      tr.diagnostic = os.str();
      return true;
    }
    return false;
  };

  WaveFunction psi = std::move(psi0);
  if (observer) observer(psi);
  std::size_t next = 0;
  while (next < sched.size() && sched[next] <= start + 1e-12) {
    if (abort_on(record(psi), psi.time)) return tr;
    ++next;
  }

  std::size_t n = 0;
  std::size_t steps = 0;
  double t = start;
  const double tol = 1e-9 * cfg.dt;
  while (t < T - tol) {
    const double lattice = start + static_cast<double>(n + 1) * cfg.dt;
    double target = std::min(lattice, T);
    bool on_schedule = false;
    if (next < sched.size() && sched[next] <= target + tol) {
      target = sched[next];
      on_schedule = true;
    }
    if (target >= lattice - tol) ++n;
    psi = strang_step(std::move(psi), in, t, target - t, disp, cfg.midpoint);
    psi.time = target;
    t = target;
    ++steps;
    if (observer) observer(psi);
    if (on_schedule) {
      if (abort_on(record(psi), t)) return tr;
      ++next;
    } else if (cfg.boundary_check_every > 0 && steps % cfg.boundary_check_every == 0) {
      if (abort_on(boundary_mass_fraction(psi, cfg.boundary_shell), t)) {
        record(psi);
        return tr;
      }
    }
  }
  return tr;
}

}  // namespace freechan
