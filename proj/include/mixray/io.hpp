#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mixray/core.hpp"

namespace mixray {

using Json = nlohmann::ordered_json;

// MRAYF1 container:
//
//   MRAYF1
//   version <tool version>
//   config <config hash>
//   dims <d0> <d1> ...
//   n <dimension>
//   components <c>
//   layout row-major
//   [lo <x> <y> ...]
//   [hi <x> <y> ...]
//   end
//
// followed by prod(dims) * components 64-bit little-endian floats, the
// component index varying fastest.
struct FieldFile {
  std::string version = kVersion;
  std::string config_hash;
  std::vector<long long> dims;
  int n = 3;
  int components = 1;
  std::vector<double> lo, hi;
  std::vector<double> data;

  std::size_t expected_size() const {
    std::size_t s = static_cast<std::size_t>(components);
    for (auto d : dims) s *= static_cast<std::size_t>(d);
    return s;
  }
};

namespace detail {

inline std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return r;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

}  // namespace detail

inline void write_field(const std::string& path, const FieldFile& f) {
  if (f.data.size() != f.expected_size()) throw Error("write_field: data size does not match dims * components");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_field: cannot open '" + path + "'");
  out << "MRAYF1\n"
      << "version " << f.version << "\n"
      << "config " << (f.config_hash.empty() ? "-" : f.config_hash) << "\n"
      << "dims " << detail::join(f.dims) << "\n"
      << "n " << f.n << "\n"
      << "components " << f.components << "\n"
      << "layout row-major\n";
  if (!f.lo.empty()) out << "lo " << detail::join(f.lo) << "\n";
  if (!f.hi.empty()) out << "hi " << detail::join(f.hi) << "\n";
  out << "end\n";
  for (double v : f.data) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    bits = detail::to_le(bits);
    out.write(reinterpret_cast<const char*>(&bits), 8);
  }
  if (!out) throw Error("write_field: write failed for '" + path + "'");
}

inline FieldFile read_field_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_field: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "MRAYF1") throw Error("read_field: '" + path + "' is not an MRAYF1 file");
  FieldFile f;
  f.version.clear();
  bool ended = false, has_dims = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "version") {
      ls >> f.version;
    } else if (key == "config") {
      ls >> f.config_hash;
      if (f.config_hash == "-") f.config_hash.clear();
    } else if (key == "dims") {
      long long d;
      while (ls >> d) {
        if (d <= 0) throw Error("read_field: non-positive dimension");
        f.dims.push_back(d);
      }
      has_dims = true;
    } else if (key == "n") {
      ls >> f.n;
    } else if (key == "components") {
      ls >> f.components;
    } else if (key == "layout") {
      std::string l;
      ls >> l;
      if (l != "row-major") throw Error("read_field: unsupported layout '" + l + "'");
    } else if (key == "lo" || key == "hi") {
      double v;
      auto& dst = key == "lo" ? f.lo : f.hi;
      while (ls >> v) dst.push_back(v);
    } else {
      throw Error("read_field: unknown header key '" + key + "'");
    }
  }
  if (!ended || !has_dims || f.components <= 0) throw Error("read_field: truncated header in '" + path + "'");
  f.data.resize(f.expected_size());
  for (double& v : f.data) {
    std::uint64_t bits;
    if (!in.read(reinterpret_cast<char*>(&bits), 8)) throw Error("read_field: truncated data in '" + path + "'");
    bits = detail::to_le(bits);
    std::memcpy(&v, &bits, 8);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error("read_field: trailing bytes in '" + path + "'");
  return f;
}

// CSV fields for tiny cases: '#'-comment lines, a header "i0,...,c0,c1,..."
// naming n multi-index columns and the components, one node per row in
// row-major order. Dims are inferred from the largest index.
inline FieldFile read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_field: cannot open '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      continue;
    }
    if (cells.size() != header.size()) throw Error("read_field: ragged CSV row in '" + path + "'");
    std::vector<double> r;
    for (const auto& c : cells) r.push_back(std::stod(c));
    rows.push_back(std::move(r));
  }
  FieldFile f;
  f.n = 0;
  for (const auto& h : header)
    if (!h.empty() && h[0] == 'i') ++f.n;
  f.components = static_cast<int>(header.size()) - f.n;
  if (f.n == 0 || f.components <= 0) throw Error("read_field: CSV header needs index and component columns");
  f.dims.assign(f.n, 0);
  for (const auto& r : rows)
    for (int a = 0; a < f.n; ++a) f.dims[a] = std::max<long long>(f.dims[a], static_cast<long long>(r[a]) + 1);
  if (f.expected_size() != rows.size() * static_cast<std::size_t>(f.components))
    throw Error("read_field: CSV does not cover a full grid");
  f.data.assign(f.expected_size(), 0.0);
  for (const auto& r : rows) {
    std::size_t k = 0;
    for (int a = 0; a < f.n; ++a) k = k * static_cast<std::size_t>(f.dims[a]) + static_cast<std::size_t>(r[a]);
    for (int c = 0; c < f.components; ++c) f.data[k * f.components + c] = r[f.n + c];
  }
  return f;
}

inline FieldFile read_field(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".csv" ? read_field_csv(path) : read_field_binary(path);
}

inline std::string csv_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Every CSV artifact starts with this comment line.
inline std::string csv_banner(const std::string& config_hash) {
  return std::string("# mixray ") + kVersion + " config " + config_hash + "\n";
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

inline void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw Error("invalid JSON in '" + path + "': " + e.what());
  }
}

}  // namespace mixray
