#pragma once

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "freechan/runner/scenario.hpp"

namespace freechan::runner {

struct SweepCell {
  std::size_t index = 0;
  json parameters;
  std::string status;  // "pass", "fail", "error"
  int exit_code = 0;
  std::string error;
  std::filesystem::path directory;
};

/// Sets a dotted path ("channel.alpha", "grid.points.0") inside a document.
inline void set_path(json& doc, const std::string& path, const json& value) {
  json* cur = &doc;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("sweep: empty parameter path");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const bool last = i + 1 == parts.size();
    const std::string& p = parts[i];
    if (cur->is_array()) {
      std::size_t k = 0;
      try {
        k = std::stoul(p);
      } catch (const std::exception&) {
        throw ConfigError("sweep: '" + p + "' is not an array index in " + path);
      }
      if (k >= cur->size()) throw ConfigError("sweep: index out of range in " + path);
      cur = &(*cur)[k];
    } else {
      cur = &(*cur)[p];
    }
    if (last) *cur = value;
  }
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

/// Worker count from FREECHAN_WORKERS, else 1.
inline std::size_t default_workers() {
  if (const char* e = std::getenv("FREECHAN_WORKERS")) {
    try {
      const long v = std::stol(e);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError("FREECHAN_WORKERS must be a positive integer");
  }
  return 1;
}

/// Cartesian product over grid {"parameters": {path: [values...]}}. Each
/// cell runs in out_dir/cell_<k>; a failing cell does not stop the others.
inline std::vector<SweepCell> run_sweep(const json& base, const json& grid, const std::filesystem::path& out_dir,
                                        std::size_t workers, const std::filesystem::path& config_base = ".") {
  if (!grid.contains("parameters") || !grid["parameters"].is_object()) {
    throw ConfigError("sweep: grid needs a 'parameters' object");
  }
  std::vector<std::pair<std::string, std::vector<json>>> axes;
  for (const auto& [k, v] : grid["parameters"].items()) {
    if (!v.is_array()) throw ConfigError("sweep: values for '" + k + "' must be an array");
    axes.emplace_back(k, v.get<std::vector<json>>());
  }
  ensure_writable(out_dir);
  std::size_t total = axes.empty() ? 0 : 1;
  for (const auto& a : axes) total *= a.second.size();
  std::vector<SweepCell> cells(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t r = i;
    cells[i].index = i;
    cells[i].directory = out_dir / ("cell_" + std::to_string(i));
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
      cells[i].parameters[it->first] = it->second[r % it->second.size()];
      r /= it->second.size();
    }
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < total;) {
      SweepCell& c = cells[i];
      try {
        json doc = base;
        for (const auto& [k, v] : c.parameters.items()) set_path(doc, k, v);
        if (!doc.contains("output")) doc["output"] = json::object();
        doc["output"]["directory"] = std::filesystem::absolute(c.directory).string();
        const RunResult r = run_scenario(parse_config(doc, config_base));
        c.exit_code = r.exit_code;
        c.status = r.exit_code == 0 ? "pass" : "fail";
      } catch (const std::exception& e) {
        c.exit_code = 1;
        c.status = "error";
        c.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::max<std::size_t>(1, std::min(workers, total)); ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  json index = json::array();
  std::ostringstream csv;
  csv << "index";
  for (const auto& a : axes) csv << ',' << a.first;
  csv << ",status,exit_code,directory,error\n";
  for (const auto& c : cells) {
    index.push_back({{"index", c.index}, {"parameters", c.parameters}, {"status", c.status}, {"exit_code", c.exit_code},
                     {"error", c.error}, {"directory", c.directory.filename().string()}});
    csv << c.index;
    for (const auto& a : axes) csv << ',' << csv_field(c.parameters[a.first].dump());
    csv << ',' << c.status << ',' << c.exit_code << ',' << c.directory.filename().string() << ',' << csv_field(c.error) << '\n';
  }
  write_text(out_dir / "sweep_index.json", to_json_text(index));
  write_text(out_dir / "sweep_index.csv", csv.str());
  return cells;
}

}  // namespace freechan::runner
