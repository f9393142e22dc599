// freechan_lab: run scenarios, sweeps, fits, plots and snapshot inspection.
// Exit codes: 0 success, 2 diagnostic/acceptance failure, 1 execution error.

#include <CLI11.hpp>
#include <iostream>

#include "freechan/runner/sweep.hpp"

using namespace freechan;
using namespace freechan::runner;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override, bool quiet) {
  json raw = load_json(config_path);
  std::filesystem::path base = std::filesystem::path(config_path).parent_path();
  if (base.empty()) base = ".";
  if (!out_override.empty()) {
    if (!raw.contains("output")) raw["output"] = json::object();
    raw["output"]["directory"] = std::filesystem::absolute(out_override).string();
  }
  const ScenarioConfig cfg = parse_config(raw, base);
  const RunResult r = run_scenario(cfg);
  if (!quiet) {
    std::cout << "scenario " << cfg.name << " [" << r.summary["config_hash"].get<std::string>() << "] status "
              << r.summary["status"].get<std::string>() << "\n";
    for (const auto& [k, v] : r.summary["scalars"].items()) std::cout << "  " << k << " = " << v.dump() << "\n";
    for (const auto& [k, v] : r.summary["acceptance"].items()) {
      std::cout << "  acceptance " << k << ": " << (v["pass"].get<bool>() ? "pass" : "FAIL") << " (value " << v["value"].dump() << ")\n";
    }
    for (const auto& w : r.summary["warnings"]) std::cout << "  warning: " << w.get<std::string>() << "\n";
    std::cout << "artifacts in " << cfg.output_dir.string() << "\n";
  }
  return r.exit_code;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path, const std::string& out, std::size_t workers) {
  const json base = load_json(config_path);
  const json grid = load_json(grid_path);
  std::filesystem::path cbase = std::filesystem::path(config_path).parent_path();
  if (cbase.empty()) cbase = ".";
  const auto cells = run_sweep(base, grid, out, workers ? workers : default_workers(), cbase);
  int code = 0;
  for (const auto& c : cells) {
    std::cout << "cell " << c.index << " " << c.parameters.dump() << " " << c.status;
    if (!c.error.empty()) std::cout << " (" << c.error << ")";
    std::cout << "\n";
    if (c.exit_code != 0) code = 2;
  }
  return code;
}

int cmd_fit(const std::string& csv, const std::string& x, const std::string& y, double lo, double hi) {
  const Table t = read_csv(csv);
  const FitResult f = exponent_fit(t.column(x), t.column(y), lo, hi);
  const json j{{"slope", f.slope}, {"intercept", f.intercept}, {"rms", f.rms}, {"points", f.points}, {"window", {lo, hi}}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_plot(const std::string& csv, const std::string& x, const std::vector<std::string>& ys, const std::string& out, bool logx,
             bool logy, std::optional<std::pair<double, double>> window) {
  const Table t = read_csv(csv);
  std::vector<PlotSeries> s;
  for (const auto& y : ys) s.push_back({y, t.column(x), t.column(y)});
  PlotSpec spec{std::filesystem::path(csv).filename().string(), x, ys.size() == 1 ? ys[0] : "", logx, logy, std::nullopt};
  if (window) spec.fit = exponent_fit(t.column(x), t.column(ys.front()), window->first, window->second);
  write_svg(out, s, spec);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_inspect(const std::string& path) {
  const WaveFunction w = read_checkpoint(path);
  const WaveFunction p = w.in_position() ? w : spectral_transform(w, Direction::to_position);
  json j;
  j["dims"] = w.grid.dims;
  j["points"] = std::vector<std::size_t>(w.grid.points.begin(), w.grid.points.begin() + w.grid.dims);
  j["half_length"] = std::vector<double>(w.grid.half_length.begin(), w.grid.half_length.begin() + w.grid.dims);
  j["time"] = w.time;
  j["representation"] = w.in_position() ? "position" : "frequency";
  j["l2"] = norm(p);
  j["h1"] = norm(p, NormSpec::Ha(1.0));
  j["x_moment"] = x_moment(p);
  j["boundary_mass"] = boundary_mass_fraction(p);
  const Point m = position_mean(p);
  j["position_mean"] = std::vector<double>(m.begin(), m.begin() + w.grid.dims);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"freechan_lab: free-channel wave operator experiments"};
  app.require_subcommand(1);

  std::string config, out, grid_path, csv, xcol = "time", ycol, snapshot;
  std::vector<std::string> ycols;
  bool quiet = false, logx = false, logy = false;
  std::size_t workers = 0;
  double lo = 0, hi = 0;
  std::vector<double> window;

  auto* run = app.add_subcommand("run", "run one scenario");
  run->add_option("config", config, "scenario JSON")->required();
  run->add_option("-o,--output", out, "override the output directory");
  run->add_flag("-q,--quiet", quiet);

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("config", config, "template scenario JSON")->required();
  sweep->add_option("grid", grid_path, "sweep grid JSON")->required();
  sweep->add_option("-o,--output", out, "output directory")->required();
  sweep->add_option("-j,--workers", workers, "parallel workers (default FREECHAN_WORKERS or 1)");

  auto* fit = app.add_subcommand("fit", "power-law fit of a CSV column");
  fit->add_option("csv", csv)->required();
  fit->add_option("--x", xcol);
  fit->add_option("--y", ycol)->required();
  fit->add_option("--lo", lo)->required();
  fit->add_option("--hi", hi)->required();

  auto* plot = app.add_subcommand("plot", "SVG plot of CSV columns");
  plot->add_option("csv", csv)->required();
  plot->add_option("--x", xcol);
  plot->add_option("--y", ycols)->required();
  plot->add_option("-o,--output", out)->required();
  plot->add_flag("--logx", logx);
  plot->add_flag("--logy", logy);
  plot->add_option("--fit", window, "fit window lo hi for the first y column")->expected(2);

  auto* inspect = app.add_subcommand("inspect", "summarize a snapshot file");
  inspect->add_option("snapshot", snapshot)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config, out, quiet);
    if (*sweep) return cmd_sweep(config, grid_path, out, workers);
    if (*fit) return cmd_fit(csv, xcol, ycol, lo, hi);
    if (*plot) {
      std::optional<std::pair<double, double>> w;
      if (window.size() == 2) w = std::make_pair(window[0], window[1]);
      return cmd_plot(csv, xcol, ycols, out, logx, logy, w);
    }
    if (*inspect) return cmd_inspect(snapshot);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
