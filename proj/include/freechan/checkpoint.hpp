#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "freechan/errors.hpp"
#include "freechan/field.hpp"

namespace freechan {

// WFN1 layout: "WFN1", u32 dims, per axis (u64 N, f64 L), f64 time,
// u8 representation, then row-major (re, im) f64 pairs. Little-endian.
namespace detail {

static_assert(std::endian::native == std::endian::little, "WFN1 io assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("wfn: truncated file " + path);
  return v;
}

}  // namespace detail

inline void write_checkpoint(const WaveFunction& w, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("wfn: cannot open " + path.string() + " for writing");
  os.write("WFN1", 4);
  detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(w.grid.dims));
  for (int d = 0; d < w.grid.dims; ++d) {
    detail::put<std::uint64_t>(os, w.grid.points[d]);
    detail::put<double>(os, w.grid.half_length[d]);
  }
  detail::put<double>(os, w.time);
  detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(w.representation));
  os.write(reinterpret_cast<const char*>(w.values.data()),
           static_cast<std::streamsize>(w.values.size() * sizeof(cplx)));
  if (!os) throw IoError("wfn: write failed for " + path.string());
}

inline WaveFunction read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("wfn: cannot open " + path.string());
  const std::string p = path.string();
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "WFN1", 4) != 0) throw IoError("wfn: bad magic in " + p);
  const auto dims = detail::get<std::uint32_t>(is, p);
  if (dims < 1 || dims > 3) throw IoError("wfn: bad dimension count in " + p);
  std::array<std::size_t, 3> n{1, 1, 1};
  std::array<double, 3> l{1, 1, 1};
  for (std::uint32_t d = 0; d < dims; ++d) {
    n[d] = detail::get<std::uint64_t>(is, p);
    l[d] = detail::get<double>(is, p);
  }
  Grid g;
  try {
    g = make_grid(static_cast<int>(dims), n, l);
  } catch (const ConfigError& e) {
    throw IoError("wfn: " + p + ": " + e.what());
  }
  const double t = detail::get<double>(is, p);
  const auto rep = detail::get<std::uint8_t>(is, p);
  if (rep > 1) throw IoError("wfn: bad representation flag in " + p);
  ComplexField v(g.size());
  if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(cplx)))) {
    throw IoError("wfn: truncated samples in " + p);
  }
  return {g, std::move(v), t, static_cast<Representation>(rep)};
}

}  // namespace freechan
