#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "freechan/diagnostics.hpp"
#include "freechan/errors.hpp"

namespace freechan::runner {

/// Column-major table written as CSV with 17 significant digits.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // one vector per column

  void add(std::string name, std::vector<double> v) {
    columns.push_back(std::move(name));
    data.push_back(std::move(v));
  }
  [[nodiscard]] std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
  [[nodiscard]] const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return data[i];
    }
    throw UsageError("table: no column '" + name + "'");
  }
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Creates dir (and parents) and checks that it accepts files.
inline void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  const auto probe = dir / ".freechan_write_probe";
  {
    std::ofstream os(probe);
    if (!os || !(os << "x")) throw IoError("output directory is not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed: " + path.string());
}

inline std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << format_double(t.data[c][r]);
    os << '\n';
  }
  return os.str();
}

inline void write_csv(const std::filesystem::path& path, const Table& t) { write_text(path, to_csv(t)); }

inline Table read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty csv: " + path.string());
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.add(cell, {});
  }
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= t.columns.size()) throw IoError("csv row " + std::to_string(row + 2) + " has too many fields");
      try {
        t.data[c].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("csv: bad number '" + cell + "' in row " + std::to_string(row + 2));
      }
      ++c;
    }
    if (c != t.columns.size()) throw IoError("csv row " + std::to_string(row + 2) + " has too few fields");
    ++row;
  }
  return t;
}

/// Deterministic JSON text: sorted keys, round-trip doubles, trailing newline.
inline std::string to_json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title;
  std::string x_label = "t";
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::optional<FitResult> fit;  // drawn as a dashed line with its slope
};

/// Minimal SVG line plot.
inline std::string to_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
  const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!ok(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x1 = x0 + 1;
  if (y1 - y0 < 1e-300) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (ty(v) - y0) / (y1 - y0) * (H - mt - mb); };
  auto lbl = [](double v, bool lg) { return lg ? "1e" + format_double(std::round(v * 100) / 100) : format_double(std::round(v * 1e4) / 1e4); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << spec.title << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << ml << "\" y=\"" << H - mb + 16 << "\">" << lbl(x0, spec.log_x) << "</text>\n";
  os << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"end\">" << lbl(x1, spec.log_x) << "</text>\n";
  os << "<text x=\"" << ml - 4 << "\" y=\"" << H - mb << "\" text-anchor=\"end\">" << lbl(y0, spec.log_y) << "</text>\n";
  os << "<text x=\"" << ml - 4 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\">" << lbl(y1, spec.log_y) << "</text>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << spec.x_label << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2 << ")\" text-anchor=\"middle\">" << spec.y_label
     << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    os << "<polyline fill=\"none\" stroke=\"" << colors[k % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (ok(s.x[i], s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 16 + 14 * k << "\" fill=\"" << colors[k % 6] << "\">" << s.label << "</text>\n";
  }
  if (spec.fit && spec.fit->points > 0) {
    const auto& f = *spec.fit;
    auto fy = [&](double x) { return std::exp(f.intercept) * std::pow(x, f.slope); };
    os << "<line x1=\"" << px(f.window_lo) << "\" y1=\"" << py(fy(f.window_lo)) << "\" x2=\"" << px(f.window_hi) << "\" y2=\""
       << py(fy(f.window_hi)) << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
    os << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 << "\" text-anchor=\"end\">slope " << format_double(std::round(f.slope * 1e4) / 1e4)
       << " on [" << format_double(f.window_lo) << ", " << format_double(f.window_hi) << "]</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void write_svg(const std::filesystem::path& path, const std::vector<PlotSeries>& series, const PlotSpec& spec) {
  write_text(path, to_svg(series, spec));
}

}  // namespace freechan::runner
