#pragma once

// Field dumps: <stem>.bin holds interleaved (re, im) float64 samples in
// row-major order, little-endian; <stem>.json is the descriptor
// {format, dim, sizes, half_width, time, eps}.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nrkg/errors.hpp"
#include "nrkg/spectral.hpp"

namespace nrkg {

inline constexpr const char* kFieldFormat = "nrkg-field-v1";

struct FieldDescriptor {
  int dim = 1;
  std::size_t points_per_axis = 0;
  double half_width = 0.0;
  double time = 0.0;
  double eps = 0.0;
};

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) {
    return x;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((x >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

inline std::string bin_path(const std::filesystem::path& stem) { return stem.string() + ".bin"; }
inline std::string json_path(const std::filesystem::path& stem) { return stem.string() + ".json"; }

}  // namespace detail

inline void write_field(const std::filesystem::path& stem, const SpectralField& f, double time, double eps) {
  const Grid& g = f.grid();
  {
    const std::string path = detail::bin_path(stem);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    std::vector<std::uint64_t> words;
    words.reserve(2 * f.size());
    for (cplx z : f.values()) {
      words.push_back(detail::to_little_endian(std::bit_cast<std::uint64_t>(z.real())));
      words.push_back(detail::to_little_endian(std::bit_cast<std::uint64_t>(z.imag())));
    }
    out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 8));
    if (!out) throw IoError(path, "write failed");
  }
  nlohmann::json desc;
  desc["format"] = kFieldFormat;
  desc["dim"] = g.dim();
  desc["sizes"] = std::vector<std::size_t>(static_cast<std::size_t>(g.dim()), g.points_per_axis());
  desc["half_width"] = g.half_width();
  desc["time"] = time;
  desc["eps"] = eps;
  const std::string path = detail::json_path(stem);
  std::ofstream out(path);
  if (!out) throw IoError(path, "cannot open for writing");
  out << desc.dump(2) << '\n';
  if (!out) throw IoError(path, "write failed");
}

inline FieldDescriptor read_field_descriptor(const std::filesystem::path& stem) {
  const std::string path = detail::json_path(stem);
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open descriptor");
  nlohmann::json desc;
  try {
    in >> desc;
    if (desc.at("format").get<std::string>() != kFieldFormat) throw IoError(path, "unknown field format");
    FieldDescriptor d;
    d.dim = desc.at("dim").get<int>();
    const auto sizes = desc.at("sizes").get<std::vector<std::size_t>>();
    if (sizes.size() != static_cast<std::size_t>(d.dim) || sizes.empty()) throw IoError(path, "sizes do not match dim");
    for (std::size_t s : sizes) {
      if (s != sizes.front()) throw IoError(path, "only equal sizes per axis are supported");
    }
    d.points_per_axis = sizes.front();
    d.half_width = desc.at("half_width").get<double>();
    d.time = desc.value("time", 0.0);
    d.eps = desc.value("eps", 0.0);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path, std::string("malformed descriptor: ") + e.what());
  }
}

/// Reads a dump; the returned field lives on a fresh grid built from the
/// descriptor unless `grid` is given, in which case the two must agree.
inline SpectralField read_field(const std::filesystem::path& stem, GridPtr grid = nullptr) {
  const FieldDescriptor d = read_field_descriptor(stem);
  if (!grid) {
    grid = make_grid(d.dim, d.points_per_axis, d.half_width);
  } else if (!(*grid == Grid(d.dim, d.points_per_axis, d.half_width))) {
    throw ConfigError(detail::json_path(stem) + ": dumped field grid does not match the configured grid");
  }
  const std::string path = detail::bin_path(stem);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open field data");
  std::vector<std::uint64_t> words(2 * grid->size());
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(words.size() * 8));
  if (in.gcount() != static_cast<std::streamsize>(words.size() * 8)) throw IoError(path, "truncated field data");
  std::vector<cplx> values(grid->size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = cplx(std::bit_cast<double>(detail::to_little_endian(words[2 * i])),
                     std::bit_cast<double>(detail::to_little_endian(words[2 * i + 1])));
  }
  return SpectralField(grid, std::move(values));
}

}  // namespace nrkg
