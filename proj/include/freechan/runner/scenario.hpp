#pragma once

#include <chrono>
#include <limits>

#include "freechan/channels.hpp"
#include "freechan/checkpoint.hpp"
#include "freechan/diagnostics.hpp"
#include "freechan/runner/config.hpp"
#include "freechan/runner/outputs.hpp"

namespace freechan::runner {

struct RunResult {
  json summary;
  json timings;
  int exit_code = 0;  // 0 pass, 2 diagnostic failure
  std::vector<std::filesystem::path> artifacts;
};

namespace detail {

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline std::string time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

inline double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// Runs one scenario and writes its artifacts into cfg.output_dir. Throws
/// IoError if the directory is unusable; nothing is written in that case.
inline RunResult run_scenario(const ScenarioConfig& cfg) {
  ensure_writable(cfg.output_dir);
  const auto& dir = cfg.output_dir;
  const bool csv = std::find(cfg.formats.begin(), cfg.formats.end(), "csv") != cfg.formats.end();
  const bool svg = std::find(cfg.formats.begin(), cfg.formats.end(), "svg") != cfg.formats.end();
  const bool wfn = std::find(cfg.formats.begin(), cfg.formats.end(), "wfn") != cfg.formats.end();

  RunResult res;
  json scalars = json::object();
  json fits = json::object();
  std::vector<std::string> warnings = cfg.warnings;
  detail::Stopwatch clock;
  auto emit_csv = [&](const std::string& name, const Table& t) {
    if (!csv) return;
    write_csv(dir / name, t);
    res.artifacts.push_back(dir / name);
  };
  auto emit_svg = [&](const std::string& name, const std::vector<PlotSeries>& s, const PlotSpec& spec) {
    if (!svg) return;
    write_svg(dir / name, s, spec);
    res.artifacts.push_back(dir / name);
  };
  auto fit = [&](const std::string& key, const std::vector<double>& t, const std::vector<double>& v) -> std::optional<FitResult> {
    try {
      const FitResult f = exponent_fit(t, v, cfg.fit_window.first, cfg.fit_window.second);
      fits[key] = {{"slope", f.slope}, {"intercept", f.intercept}, {"rms", f.rms}, {"points", f.points},
                   {"window", {f.window_lo, f.window_hi}}};
      scalars[key + "_slope"] = f.slope;
      return f;
    } catch (const DomainError& e) {
      warnings.push_back(key + " fit skipped: " + e.what());
      scalars[key + "_slope"] = nullptr;
      return std::nullopt;
    }
  };

  // Solve, feeding the step observers.
  const bool want_cook = cfg.wants("cook");
  const bool want_rpres = cfg.wants("rpres");
  const bool want_charge = cfg.wants("charge");
  std::optional<CookAccumulator> cook;
  std::optional<RpresAccumulator> rpres;
  std::optional<DuhamelAccumulator> duhamel;
  if (want_cook) cook.emplace(cfg.params, cfg.interaction, cfg.solver.schedule, cfg.dispersion);
  if (want_rpres) {
    rpres.emplace(cfg.params, cfg.interaction, cfg.params.b > 0 ? RpresObservable::momentum_cutoff : RpresObservable::position_cutoff,
                  cfg.dispersion);
  }
  if (want_charge) duhamel.emplace(*cfg.interaction.charge_transfer(), cfg.solver.schedule, cfg.dispersion);
  StepObserver observer;
  if (cook || rpres || duhamel) {
    observer = [&](const WaveFunction& w) {
      if (cook) (*cook)(w);
      if (rpres) (*rpres)(w);
      if (duhamel) (*duhamel)(w);
    };
  }
  const Trajectory tr = evolve(cfg.initial, cfg.interaction, cfg.solver, cfg.final_time, observer, cfg.dispersion);
  res.timings["evolve_seconds"] = clock.lap();
  for (const auto& w : tr.warnings) warnings.push_back(w);

  {
    Table t;
    std::vector<double> c[5];
    for (const auto& r : tr.log) {
      c[0].push_back(r.time);
      c[1].push_back(r.l2);
      c[2].push_back(r.ha);
      c[3].push_back(r.drift);
      c[4].push_back(r.boundary_mass);
    }
    scalars["mass_drift_max"] = detail::max_of(c[3]);
    scalars["boundary_mass_max"] = detail::max_of(c[4]);
    t.add("time", c[0]);
    t.add("l2", c[1]);
    t.add("ha", c[2]);
    t.add("drift", c[3]);
    t.add("boundary_mass", c[4]);
    emit_csv("solver_log.csv", t);
  }
  scalars["initial_norm"] = norm(cfg.initial);
  if (cfg.soliton_mass > 0) scalars["soliton_mass_analytic"] = cfg.soliton_mass;

  if (wfn) {
    for (double t : cfg.snapshot_times) {
      if (tr.aborted() && t > tr.times.back()) continue;
      const auto p = dir / ("psi_t" + detail::time_tag(t) + ".wfn");
      write_checkpoint(tr.at(t), p);
      res.artifacts.push_back(p);
    }
  }

  if (!tr.aborted()) {
    if (cfg.wants("channel")) {
      const ChannelRecord rec = decompose(tr, cfg.initial, cfg.params, cfg.epsilon, default_probes(cfg.grid), cfg.dispersion);
      for (const auto& w : rec.warnings) {
        if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
      }
      std::vector<double> omega_norms;
      for (const auto& o : rec.omega_snapshots) omega_norms.push_back(norm(o));
      Table t;
      t.add("time", rec.times);
      t.add("omega_norm", omega_norms);
      t.add("cauchy_increment", rec.cauchy_increments);
      t.add("free_norm", rec.free_part_norms);
      t.add("psi_w_norm", rec.psi_w_norms);
      t.add("psi_d_norm", rec.psi_d_norms);
      t.add("psi_w_eps_norm", rec.psi_w_eps_norms);
      t.add("psi_w_eps_moment", rec.psi_w_eps_moments);
      for (std::size_t k = 0; !rec.weak_overlaps.empty() && k < rec.weak_overlaps.front().size(); ++k) {
        std::vector<double> col;
        for (const auto& ov : rec.weak_overlaps) col.push_back(std::abs(ov[k]));
        t.add("probe_overlap_" + std::to_string(k), col);
      }
      emit_csv("channel.csv", t);
      if (!rec.times.empty()) {
        scalars["psi_w_final"] = rec.psi_w_norms.back();
        scalars["psi_w_final_mass"] = rec.psi_w_norms.back() * rec.psi_w_norms.back();
        scalars["psi_w_eps_final"] = rec.psi_w_eps_norms.back();
        scalars["psi_plus_norm"] = norm(rec.psi_plus);
        scalars["psi_plus_halfway_change"] = rec.psi_plus_halfway_change;
        scalars["psi_plus_distance_to_initial"] = distance(rec.psi_plus, cfg.initial);
        scalars["partition_error"] = rec.partition_error;
        double ov = 0.0;
        for (const auto& o : rec.weak_overlaps.back()) ov = std::max(ov, std::abs(o));
        scalars["probe_overlap_final_max"] = ov;
        if (rec.cauchy_increments.size() > 1) {
          const std::vector<double> ct(rec.times.begin() + 1, rec.times.end());
          const std::vector<double> cv(rec.cauchy_increments.begin() + 1, rec.cauchy_increments.end());
          bool positive = std::all_of(cv.begin(), cv.end(), [](double v) { return v > 0; });
          std::optional<FitResult> f;
          if (positive) f = fit("cauchy_increment", ct, cv);
          PlotSpec ps{"Cauchy increments of the channel map", "t", "||Omega(t_k) - Omega(t_k-1)||", true, true, f};
          emit_svg("cauchy_increments.svg", {{"increment", ct, cv}}, ps);
        }
        std::optional<FitResult> fm;
        if (std::all_of(rec.psi_w_eps_moments.begin(), rec.psi_w_eps_moments.end(), [](double v) { return v > 0; })) {
          fm = fit("psi_w_eps_moment", rec.times, rec.psi_w_eps_moments);
        }
        PlotSpec pm{"Weak part |x| moment", "t", "(psi_w, |x| psi_w)", true, true, fm};
        emit_svg("psi_w_eps_moment.svg", {{"moment", rec.times, rec.psi_w_eps_moments}}, pm);
        PlotSpec pw{"Weakly localized part", "t", "norm", true, true, std::nullopt};
        emit_svg("psi_w.svg", {{"psi_w", rec.times, rec.psi_w_norms}, {"psi_w_eps", rec.times, rec.psi_w_eps_norms}}, pw);
      }
      if (wfn) {
        for (double ts : cfg.snapshot_times) {
          for (std::size_t i = 0; i < rec.times.size(); ++i) {
            if (std::abs(rec.times[i] - ts) < 1e-9) {
              const auto p = dir / ("omega_t" + detail::time_tag(ts) + ".wfn");
              write_checkpoint(rec.omega_snapshots[i], p);
              res.artifacts.push_back(p);
            }
          }
        }
      }
      res.timings["channel_seconds"] = clock.lap();
    }

    if (cook) {
      const CookSeries& s = cook->series();
      const auto r = cook_reconstruct(s);
      Table t;
      std::vector<double> tt, rr;
      for (const auto& x : r) {
        tt.push_back(x.time);
        rr.push_back(x.residual);
      }
      t.add("time", tt);
      t.add("residual", rr);
      emit_csv("cook.csv", t);
      scalars["cook_residual_max"] = detail::max_of(rr);
      std::vector<double> st, sv;
      log_subsample(s.step_times, s.psi_in_norms, 1.0, cfg.final_time, 16, st, sv);
      Table u;
      u.add("time", st);
      u.add("psi_in_norm", sv);
      emit_csv("psi_in.csv", u);
      scalars["psi_in_final"] = s.psi_in_norms.empty() ? 0.0 : s.psi_in_norms.back();
      std::optional<FitResult> f;
      if (std::all_of(sv.begin(), sv.end(), [](double v) { return v > 0; })) {
        f = fit("psi_in", st, sv);
      } else {
        scalars["psi_in_slope"] = nullptr;
      }
      PlotSpec ps{"Interaction integrand", "t", "||psi_in(t)||", true, true, f};
      emit_svg("psi_in.svg", {{"psi_in", st, sv}}, ps);
      res.timings["cook_seconds"] = clock.lap();
    }

    if (rpres) {
      const ObservableSeries s = rpres->series();
      const RpresBudget b = rpres_decompose(s, rpres->interaction_norms(), rpres->weighted_norm_sup());
      std::vector<double> st, sv, sd, sc, sg;
      for (std::size_t i = 0; i < s.times.size(); i += std::max<std::size_t>(1, s.times.size() / 2048)) {
        st.push_back(s.times[i]);
        sv.push_back(s.values[i]);
        sd.push_back(s.derivative[i]);
        sc.push_back(s.c_p[i]);
        sg.push_back(s.g[i]);
      }
      Table t;
      t.add("time", st);
      t.add("value", sv);
      t.add("derivative", sd);
      t.add("c_p", sc);
      t.add("g", sg);
      emit_csv("rpres.csv", t);
      scalars["rpres_int_c_p"] = b.int_c_p;
      scalars["rpres_sup_b"] = b.sup_b;
      scalars["rpres_g_l1"] = b.g_l1;
      scalars["rpres_g_l1_exact"] = b.g_l1_exact;
      scalars["rpres_g_bound"] = b.g_bound;
      scalars["rpres_min_c_p"] = b.min_c_p;
      scalars["rpres_pass"] = b.pass ? 1.0 : 0.0;
      if (!b.pass) warnings.push_back("rpres budget check failed");
      res.timings["rpres_seconds"] = clock.lap();
    }

    if (duhamel) {
      const ChargeTransfer& ct = *cfg.interaction.charge_transfer();
      const ChargeChannelRecord rec = charge_channels(tr, ct, *duhamel, cfg.initial, cfg.params, cfg.epsilon, cfg.dispersion);
      for (const auto& w : rec.warnings) warnings.push_back(w);
      Table t;
      t.add("time", rec.times);
      t.add("duhamel_residual", rec.duhamel_residual);
      std::vector<double> offdiag;
      for (const auto& r : rec.overlaps) {
        double m = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) {
          for (std::size_t l = 0; l < r.size(); ++l) {
            if (j == l) continue;
            const double d = std::sqrt(std::abs(r[j][j]) * std::abs(r[l][l]));
            if (d > 0) m = std::max(m, std::abs(r[j][l]) / d);
          }
        }
        offdiag.push_back(m);
      }
      t.add("overlap_offdiag", offdiag);
      double track = 0.0;
      for (std::size_t j = 0; j < ct.movers.size(); ++j) {
        std::vector<double> wn, xc, bm;
        for (std::size_t i = 0; i < rec.times.size(); ++i) {
          wn.push_back(rec.weak_norms[i][j]);
          xc.push_back(rec.weak_centers[i][j][0]);
          bm.push_back(rec.boosted_moments[i][j]);
        }
        t.add("weak_norm_" + std::to_string(j), wn);
        t.add("weak_center_" + std::to_string(j), xc);
        t.add("boosted_moment_" + std::to_string(j), bm);
        if (!rec.times.empty() && rec.weak_norms.back()[j] > 1e-8) {
          const double tf = rec.times.back();
          double e2 = 0.0;
          for (int d = 0; d < cfg.grid.dims; ++d) {
            const double e = rec.weak_centers.back()[j][d] - tf * ct.movers[j].velocity[d];
            e2 += e * e;
          }
          track = std::max(track, std::sqrt(e2) / (2.0 * std::pow(tf, 0.5 + cfg.epsilon)));
        }
      }
      emit_csv("charge.csv", t);
      scalars["duhamel_residual_max"] = detail::max_of(rec.duhamel_residual);
      scalars["overlap_offdiag_final"] = offdiag.empty() ? 0.0 : offdiag.back();
      scalars["tracking_ratio_final"] = track;  // |center - t v| / (2 t^{1/2+eps})
      res.timings["charge_seconds"] = clock.lap();
    }

    std::vector<WaveFunction> late;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      if (tr.times[i] >= 1.0) late.push_back(tr.snapshots[i]);
    }
    if (cfg.wants("morawetz") && !late.empty()) {
      const ObservableSeries s = morawetz_series(late);
      Table t;
      t.add("time", s.times);
      t.add("value", s.values);
      t.add("derivative", s.derivative);
      emit_csv("morawetz.csv", t);
      scalars["morawetz_final"] = s.values.back();
      emit_svg("morawetz.svg", {{"<A>", s.times, s.values}}, PlotSpec{"Morawetz observable", "t", "value", true, false, std::nullopt});
    }
    if (cfg.wants("heisenberg") && !late.empty()) {
      const ObservableSeries s = prob_series(late, moving_cutoff_observable(cfg.params.alpha, cfg.dispersion));
      Table t;
      t.add("time", s.times);
      t.add("value", s.values);
      t.add("derivative", s.derivative);
      emit_csv("heisenberg.csv", t);
      double md = INFINITY;
      for (double d : s.derivative) md = std::min(md, d);
      scalars["heisenberg_min_derivative"] = detail::number(md);
    }
  }

  // Acceptance bands.
  json acc = json::object();
  bool pass = !tr.aborted();
  for (const auto& [key, band] : cfg.acceptance) {
    json e;
    e["min"] = band.min ? json(*band.min) : json(nullptr);
    e["max"] = band.max ? json(*band.max) : json(nullptr);
    bool ok = scalars.contains(key) && scalars[key].is_number();
    if (ok) {
      const double v = scalars[key].get<double>();
      e["value"] = v;
      if (band.min && !(v >= *band.min)) ok = false;
      if (band.max && !(v <= *band.max)) ok = false;
    } else {
      e["value"] = nullptr;
    }
    e["pass"] = ok;
    acc[key] = e;
    pass = pass && ok;
  }

  json& s = res.summary;
  s["schema_version"] = kSchemaVersion;
  s["code_version"] = kCodeVersion;
  s["name"] = cfg.name;
  s["config_hash"] = config_hash(cfg.raw);
  s["config"] = cfg.raw;
  s["status"] = tr.status;
  s["diagnostic"] = tr.diagnostic;
  s["final_time_reached"] = tr.times.empty() ? 0.0 : tr.times.back();
  s["splitting_order"] = tr.splitting_order;
  for (auto& [k, v] : scalars.items()) {
    if (v.is_number_float() && !std::isfinite(v.get<double>())) v = nullptr;
  }
  json diags = json::object();
  for (const auto& d : cfg.diagnostics) diags[d] = tr.aborted() ? "skipped: run aborted" : "ok";
  s["diagnostics"] = diags;
  s["scalars"] = scalars;
  s["fits"] = fits;
  s["acceptance"] = acc;
  s["warnings"] = warnings;
  s["pass"] = pass;
  res.exit_code = pass ? 0 : 2;

  res.timings["total_seconds"] = 0.0;
  for (auto& [k, v] : res.timings.items()) {
    if (k != "total_seconds") res.timings["total_seconds"] = res.timings["total_seconds"].get<double>() + v.get<double>();
  }
  if (std::find(cfg.formats.begin(), cfg.formats.end(), "json") != cfg.formats.end()) {
    write_text(dir / "timings.json", to_json_text(res.timings));
    write_text(dir / "summary.json", to_json_text(res.summary));
    res.artifacts.push_back(dir / "timings.json");
    res.artifacts.push_back(dir / "summary.json");
  }
  return res;
}

}  // namespace freechan::runner
