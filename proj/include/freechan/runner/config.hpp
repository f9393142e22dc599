#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "freechan/channels.hpp"
#include "freechan/checkpoint.hpp"
#include "freechan/errors.hpp"
#include "freechan/interaction.hpp"
#include "freechan/phase_space.hpp"
#include "freechan/propagators.hpp"

namespace freechan::runner {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "freechan-lab 0.1.0";

/// Acceptance band on one summary scalar.
struct Band {
  std::optional<double> min;
  std::optional<double> max;
};

/// Parsed scenario. The raw document is kept for hashing and echoing.
struct ScenarioConfig {
  json raw;
  std::string name;
  Grid grid;
  Dispersion dispersion;
  Interaction interaction;
  WaveFunction initial;
  SplitStepConfig solver;
  double final_time = 1.0;
  ProjectorParams params;
  double epsilon = 0.1;
  std::vector<std::string> diagnostics;
  std::map<std::string, Band> acceptance;
  std::pair<double, double> fit_window{16.0, 256.0};
  std::filesystem::path output_dir;
  std::vector<std::string> formats{"csv", "json", "svg"};
  std::vector<double> snapshot_times;
  std::uint64_t seed = 1;
  double soliton_mass = 0.0;  // analytic mass of the embedded soliton, when present
  double delta = 0.0;         // decay tag of the localized part, for range checks
  std::vector<std::string> warnings;

  [[nodiscard]] bool wants(const std::string& d) const {
    return std::find(diagnostics.begin(), diagnostics.end(), d) != diagnostics.end();
  }
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string config_hash(const json& raw) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(raw.dump())));
  return buf;
}

namespace detail {

inline Point point(const json& j, const char* key, int dims, Point fallback = {0.0, 0.0, 0.0}) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  Point p{0.0, 0.0, 0.0};
  if (v.is_number()) {
    p[0] = v.get<double>();
    return p;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != dims) {
    throw ConfigError(std::string("config: '") + key + "' needs " + std::to_string(dims) + " components");
  }
  for (int d = 0; d < dims; ++d) p[d] = v[d].get<double>();
  return p;
}

inline cplx complex_value(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError("config: complex value must be a number or [re, im]");
}

inline double dist2(const Point& x, const Point& c, int dims) {
  double r = 0.0;
  for (int d = 0; d < dims; ++d) r += (x[d] - c[d]) * (x[d] - c[d]);
  return r;
}

// Profile of a bump centered at the origin: "bracket" A <x>^{-delta}, "gaussian" A exp(-|x|^2 / w^2).
inline std::function<cplx(const Point&, double)> profile(const json& j, int dims, double& delta) {
  const std::string kind = j.value("profile", "bracket");
  const cplx amp = complex_value(j.value("amplitude", json(1.0)));
  const double width = j.value("width", 1.0);
  const double mod_freq = j.contains("modulation") ? j["modulation"].value("frequency", 0.0) : 0.0;
  const double mod_depth = j.contains("modulation") ? j["modulation"].value("depth", 0.0) : 0.0;
  if (!(width > 0.0)) throw ConfigError("config: potential width must be positive");
  auto mod = [=](double t) { return 1.0 + mod_depth * std::sin(mod_freq * t); };
  if (kind == "bracket") {
    delta = j.value("delta", 3.0);
    const double dl = delta;
    return [=](const Point& x, double t) {
      return amp * mod(t) * std::pow(1.0 + dist2(x, {0, 0, 0}, dims) / (width * width), -dl / 2.0);
    };
  }
  if (kind == "gaussian") {
    delta = j.value("delta", 10.0);
    return [=](const Point& x, double t) { return amp * mod(t) * std::exp(-dist2(x, {0, 0, 0}, dims) / (width * width)); };
  }
  throw ConfigError("config: unknown potential profile '" + kind + "'");
}

inline InteractionTerm interaction_term(const json& j, const Grid& g, double& delta) {
  const std::string kind = j.at("kind").get<std::string>();
  const int dims = g.dims;
  if (kind == "localized") {
    double d = 0.0;
    auto prof = profile(j, dims, d);
    const Point c = point(j, "center", dims);
    const bool td = j.contains("modulation");
    delta = d;
    return make_localized(g, [prof, c, g](const Point& x, double t) {
      Point y{0.0, 0.0, 0.0};
      for (int k = 0; k < g.dims; ++k) y[k] = g.wrap(k, x[k] - c[k]);
      return prof(y, t);
    }, d, td);
  }
  if (kind == "charge_transfer") {
    ChargeTransfer ct;
    for (const auto& m : j.at("movers")) {
      double d = 0.0;
      auto prof = profile(m, dims, d);
      const Point c = point(m, "center", dims);
      Mover mv;
      mv.profile = [prof, c, g](const Point& y, double t) {
        Point z{0.0, 0.0, 0.0};
        for (int k = 0; k < g.dims; ++k) z[k] = g.wrap(k, y[k] - c[k]);
        return prof(z, t);
      };
      mv.velocity = point(m, "velocity", dims);
      mv.time_dependent = m.contains("modulation");
      ct.movers.push_back(std::move(mv));
    }
    if (ct.movers.empty()) throw ConfigError("config: charge_transfer needs at least one mover");
    validate(ct);
    return ct;
  }
  if (kind == "power") {
    PowerNonlinearity p;
    p.coefficient = complex_value(j.value("coefficient", json(1.0)));
    p.exponent = j.value("exponent", 2.0);
    if (!(p.exponent > 0.0)) throw ConfigError("config: power exponent must be positive");
    return p;
  }
  if (kind == "hartree") {
    const double power = j.value("power", 1.0);
    const double soft = j.value("softening", 1.0);
    if (!(soft > 0.0)) throw ConfigError("config: hartree softening must be positive");
    const double sign = j.value("sign", 1.0);
    return make_hartree(g, [=](const Point& y) { return std::pow(soft * soft + y[0] * y[0] + y[1] * y[1] + y[2] * y[2], -power / 2.0); },
                        sign);
  }
  throw ConfigError("config: unknown interaction kind '" + kind + "'");
}

inline WaveFunction initial_state(const json& j, const Grid& g, double& soliton_mass, const std::filesystem::path& base) {
  const std::string kind = j.value("kind", "gaussian");
  const int dims = g.dims;
  if (kind == "gaussian" || kind == "coherent") {
    try {
      return coherent_state(g, point(j, "center", dims), point(j, "momentum", dims), j.value("width", 1.0));
    } catch (const UsageError& e) {
      throw ConfigError(std::string("config: initial packet: ") + e.what());
    }
  }
  if (kind == "soliton") {
    if (dims != 1) throw ConfigError("config: soliton data is one-dimensional");
    const double kappa = j.value("kappa", 1.0);
    const double coupling = j.value("coupling", -2.0);
    if (!(coupling < 0.0) || !(kappa > 0.0)) throw ConfigError("config: soliton needs kappa > 0 and coupling < 0");
    const double amp = kappa * std::sqrt(2.0 / -coupling);
    const double x0 = j.value("center", 0.0);
    soliton_mass = 4.0 * kappa / -coupling;
    WaveFunction w = WaveFunction::zeros(g);
    for_each_position(g, [&](std::size_t i, const Point& x) { w.values[i] = amp / std::cosh(kappa * g.wrap(0, x[0] - x0)); });
    if (j.contains("radiation")) {
      const json& r = j["radiation"];
      WaveFunction rad = coherent_state(g, point(r, "center", dims), point(r, "momentum", dims), r.value("width", 1.0));
      const double m = std::sqrt(r.value("mass", 0.04));
      for (std::size_t i = 0; i < w.values.size(); ++i) w.values[i] += m * rad.values[i];
    }
    return w;
  }
  if (kind == "file") {
    std::filesystem::path p = j.at("path").get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p)) throw ConfigError("config: initial data file not found: " + p.string());
    WaveFunction w = read_checkpoint(p);
    if (!(w.grid == g)) throw ConfigError("config: initial data file grid does not match the configured grid");
    if (!w.in_position()) w = spectral_transform(std::move(w), Direction::to_position);
    w.time = 0.0;
    return w;
  }
  throw ConfigError("config: unknown initial data kind '" + kind + "'");
}

}  // namespace detail

/// Validates and builds a scenario from a JSON document. base resolves
/// relative paths inside the document.
inline ScenarioConfig parse_config(const json& raw, const std::filesystem::path& base = ".") {
  ScenarioConfig c;
  c.raw = raw;
  try {
    if (raw.value("schema_version", 0) != kSchemaVersion) {
      throw ConfigError("config: schema_version must be " + std::to_string(kSchemaVersion));
    }
    c.name = raw.value("name", "scenario");
    const json& gj = raw.at("grid");
    const int dims = gj.at("dims").get<int>();
    std::array<std::size_t, 3> n{16, 16, 16};
    std::array<double, 3> l{1, 1, 1};
    const json& pj = gj.at("points");
    const json& lj = gj.at("half_length");
    for (int d = 0; d < std::max(1, std::min(dims, 3)); ++d) {
      n[d] = pj.is_array() ? pj.at(d).get<std::size_t>() : pj.get<std::size_t>();
      l[d] = lj.is_array() ? lj.at(d).get<double>() : lj.get<double>();
    }
    c.grid = make_grid(dims, n, l, gj.value("point_budget", kDefaultPointBudget));

    if (raw.contains("dispersion")) {
      const json& d = raw["dispersion"];
      const std::string kind = d.is_string() ? d.get<std::string>() : d.value("kind", "laplacian");
      if (kind == "laplacian") c.dispersion = Dispersion::laplacian();
      else if (kind == "relativistic") c.dispersion = Dispersion::relativistic(d.is_object() ? d.value("mass", 1.0) : 1.0);
      else throw ConfigError("config: unknown dispersion '" + kind + "'");
    }

    for (const auto& term : raw.value("interaction", json::array())) {
      double delta = 0.0;
      c.interaction.terms.push_back(detail::interaction_term(term, c.grid, delta));
      if (delta > 0.0) c.delta = delta;
    }

    c.initial = detail::initial_state(raw.at("initial"), c.grid, c.soliton_mass, base);

    const json& sj = raw.at("solver");
    c.solver.dt = sj.at("dt").get<double>();
    c.final_time = sj.at("T").get<double>();
    if (!(c.solver.dt > 0.0) || !(c.final_time > 0.0)) throw ConfigError("config: dt and T must be positive");
    if (sj.contains("schedule") && sj["schedule"].is_array()) {
      c.solver.schedule = sj["schedule"].get<std::vector<double>>();
      for (double t : c.solver.schedule) {
        if (t < 0.0 || t > c.final_time) throw ConfigError("config: schedule time outside [0, T]");
      }
    } else {
      c.solver.schedule = dyadic_schedule(c.final_time);
    }
    c.solver.boundary_threshold = sj.value("boundary_threshold", 1e-4);
    c.solver.midpoint = sj.value("midpoint", true);

    const json cj = raw.value("channel", json::object());
    c.params.alpha = cj.value("alpha", 0.4);
    c.params.b = cj.value("b", 0.0);
    c.params.a = cj.value("a", 0.0);
    c.epsilon = cj.value("epsilon", 0.1);
    if (c.params.b > 0.0) c.params.a = 0.0;
    for (auto& w : check_params(c.params, c.grid.dims, c.delta)) c.warnings.push_back(w);

    c.diagnostics = raw.value("diagnostics", std::vector<std::string>{"channel"});
    static const std::vector<std::string> known{"channel", "cook", "rpres", "charge", "morawetz", "heisenberg"};
    for (const auto& d : c.diagnostics) {
      if (std::find(known.begin(), known.end(), d) == known.end()) throw ConfigError("config: unknown diagnostic '" + d + "'");
    }
    if (c.wants("charge") && !c.interaction.charge_transfer()) throw ConfigError("config: 'charge' needs a charge_transfer term");
    if ((c.wants("cook") || c.wants("rpres") || c.wants("channel")) &&
        std::none_of(c.solver.schedule.begin(), c.solver.schedule.end(), [](double s) { return std::abs(s - 1.0) < 1e-12; })) {
      throw ConfigError("config: the schedule must contain t = 1 for channel diagnostics");
    }
    if (raw.contains("fit_window")) {
      const auto w = raw["fit_window"].get<std::vector<double>>();
      if (w.size() != 2 || !(w[0] > 0 && w[1] > w[0])) throw ConfigError("config: fit_window must be [lo, hi] with 0 < lo < hi");
      c.fit_window = {w[0], w[1]};
    }
    const json acceptance = raw.value("acceptance", json::object());
    for (const auto& [k, v] : acceptance.items()) {
      Band b;
      if (v.contains("min")) b.min = v["min"].get<double>();
      if (v.contains("max")) b.max = v["max"].get<double>();
      c.acceptance[k] = b;
    }
    const json oj = raw.value("output", json::object());
    std::filesystem::path dir = oj.value("directory", "out/" + c.name);
    if (dir.is_relative()) dir = base / dir;
    c.output_dir = dir;
    c.formats = oj.value("formats", c.formats);
    c.snapshot_times = oj.value("snapshot_times", std::vector<double>{});
    for (double t : c.snapshot_times) {
      if (std::find_if(c.solver.schedule.begin(), c.solver.schedule.end(), [&](double s) { return std::abs(s - t) < 1e-9; }) ==
          c.solver.schedule.end()) {
        throw ConfigError("config: snapshot time " + std::to_string(t) + " is not in the schedule");
      }
    }
    c.seed = raw.value("seed", std::uint64_t{1});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline json load_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
  return parse_config(load_json(path), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace freechan::runner
