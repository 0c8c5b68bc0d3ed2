#pragma once

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "mixray/core.hpp"

namespace mixray {

// Sectioned key = value text:
//
//   # comment            (also ';')
//   [section]
//   key = value          lists are comma separated
//
// Every key belongs to a section, appears at most once, and must be known.
// Missing keys take their defaults.

enum class ValueType { Real, Int, Bool, Text, Choice, RealList, IntList, Path };

struct KeySpec {
  std::string section, key;
  ValueType type;
  std::string fallback;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::vector<std::string> choices;
  bool hashed = true;  // run-location keys do not enter the config hash
};

inline const std::vector<KeySpec>& config_schema() {
  const double inf = std::numeric_limits<double>::infinity();
  static const std::vector<KeySpec> schema = {
      {"experiment", "kind", ValueType::Choice, "T1", 0, 0, {"T1", "L11"}},
      {"experiment", "F", ValueType::Real, "5", 0, 1e3},
      {"experiment", "sigma", ValueType::Choice, "auto", 0, 0, {"auto", "1", "-1"}},
      {"experiment", "weight", ValueType::Choice, "scattering", 0, 0, {"scattering", "chart"}},
      {"experiment", "seed", ValueType::Int, "0", 0, 4294967295.0},
      {"experiment", "threads", ValueType::Int, "1", 1, 256, {}, false},
      {"experiment", "output", ValueType::Text, "out", 0, 0, {}, false},
      {"chart", "kind", ValueType::Choice, "euclidean-ball-shell", 0, 0,
       {"euclidean-ball-shell", "euclidean", "conformal", "grid-sampled"}},
      {"chart", "radius", ValueType::Real, "1", 1e-6, inf},
      {"chart", "depth", ValueType::Real, "0.45", 1e-6, inf},
      {"chart", "y_half", ValueType::Real, "0.8", 1e-6, inf},
      {"chart", "concave", ValueType::Bool, "false"},
      {"chart", "lo", ValueType::RealList, "0,-1,-1"},
      {"chart", "hi", ValueType::RealList, "1,1,1"},
      {"chart", "phi0", ValueType::Real, "0"},
      {"chart", "phi_lin", ValueType::RealList, "0,0,0"},
      {"chart", "phi_quad", ValueType::RealList, "0,0,0"},
      {"chart", "metric_file", ValueType::Path, ""},
      {"grid", "nodes", ValueType::IntList, "8", 5, 64},
      {"grid", "lo", ValueType::RealList, "0.1,-0.3,-0.3"},
      {"grid", "hi", ValueType::RealList, "0.3,0.3,0.3"},
      {"field", "profile", ValueType::Choice, "gaussian", 0, 0, {"gaussian", "zero", "file"}},
      {"field", "center", ValueType::RealList, ""},
      {"field", "width", ValueType::RealList, ""},
      {"field", "direction", ValueType::RealList, "1,0.5,-0.3"},
      {"field", "tensor", ValueType::RealList, "1,0.3,-0.2,0.5,-0.4,0.1,0.2,0.6,0.7"},
      {"field", "potential", ValueType::Real, "0", 0, 1e6},
      {"field", "noise", ValueType::Real, "0", 0, 1},
      {"field", "file", ValueType::Path, ""},
      {"cutoff", "profile", ValueType::Choice, "bump", 0, 0, {"bump", "gaussian"}},
      {"cutoff", "width", ValueType::Real, "0.3", 1e-6, 1},
      {"cutoff", "nu", ValueType::Real, "0", 0, inf},
      {"quadrature", "radial", ValueType::Int, "8", 1, 256},
      {"quadrature", "angular", ValueType::Int, "32", 1, 1024},
      {"quadrature", "step", ValueType::Real, "0.01", 1e-6, 0.5},
      {"quadrature", "max_steps", ValueType::Int, "10000", 10, 1e8},
      {"quadrature", "symbol_order", ValueType::Int, "64", 8, 1024},
      {"solver", "method", ValueType::Choice, "auto", 0, 0, {"auto", "cg", "direct"}},
      {"solver", "tolerance", ValueType::Real, "1e-8", 1e-16, 1e-1},
      {"solver", "regularization", ValueType::Real, "1e-6", 0, 1},
      {"solver", "max_iterations", ValueType::Int, "0", 0, 1e9},
      {"solver", "unknown_cap", ValueType::Int, "8000", 1, 1e6},
      {"symbols", "kind", ValueType::Choice, "T1_FIBER", 0, 0, {"T1_FIBER", "T1_BASE", "L11_FIBER", "L11_BASE"}},
      {"symbols", "n", ValueType::Int, "3", 3, 8},
      {"symbols", "directions", ValueType::Int, "64", 1, 100000},
      {"symbols", "h", ValueType::Real, "0.1", 1e-6, 10},
      {"symbols", "alpha", ValueType::Real, "0.5", 1e-6, 1e3},
      {"symbols", "restricted", ValueType::Choice, "auto", 0, 0, {"auto", "true", "false"}},
      {"layers", "levels", ValueType::RealList, "0.2,0.3"},
  };
  return schema;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

inline std::string where(const std::string& section, const std::string& key, int line) {
  std::string w = "'" + section + "." + key + "'";
  if (line > 0) w += " (line " + std::to_string(line) + ")";
  return w;
}

inline double parse_real(const std::string& s, const std::string& at) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (...) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) throw ConfigError("config: " + at + ": expected a number, got '" + s + "'");
  return v;
}

inline long long parse_int(const std::string& s, const std::string& at) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (...) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError("config: " + at + ": expected an integer, got '" + s + "'");
  return v;
}

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Git blob hash: SHA-1 of "blob <size>\0" followed by the text.
inline std::string git_blob_hash(const std::string& text) {
  const std::string head = "blob " + std::to_string(text.size()) + std::string(1, '\0');
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 || EVP_DigestUpdate(ctx, head.data(), head.size()) != 1 ||
      EVP_DigestUpdate(ctx, text.data(), text.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha1: digest failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

struct ConfigEntry {
  std::string value;
  int line = 0;  // 0 for defaults
};

struct ExperimentConfig {
  std::map<std::string, ConfigEntry> raw;  // "section.key" -> value
  std::string base_dir = ".";               // relative paths resolve here

  std::string text(const std::string& section, const std::string& key) const {
    auto it = raw.find(section + "." + key);
    if (it == raw.end()) throw ConfigError("config: no key '" + section + "." + key + "'");
    return it->second.value;
  }
  int line(const std::string& section, const std::string& key) const { return raw.at(section + "." + key).line; }
  std::string at(const std::string& section, const std::string& key) const {
    return detail::where(section, key, line(section, key));
  }
  double real(const std::string& s, const std::string& k) const { return detail::parse_real(text(s, k), at(s, k)); }
  long long integer(const std::string& s, const std::string& k) const {
    return detail::parse_int(text(s, k), at(s, k));
  }
  bool flag(const std::string& s, const std::string& k) const { return text(s, k) == "true"; }
  std::vector<double> reals(const std::string& s, const std::string& k) const {
    std::vector<double> out;
    for (const auto& item : detail::split_list(text(s, k))) out.push_back(detail::parse_real(item, at(s, k)));
    return out;
  }
  std::vector<long long> integers(const std::string& s, const std::string& k) const {
    std::vector<long long> out;
    for (const auto& item : detail::split_list(text(s, k))) out.push_back(detail::parse_int(item, at(s, k)));
    return out;
  }
  std::string path(const std::string& s, const std::string& k) const {
    const std::string p = text(s, k);
    if (p.empty()) return p;
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (std::filesystem::path(base_dir) / fp).string();
  }

  // One line per key in schema order, values normalized.
  std::string canonical(bool hashed_only = false) const {
    std::string out, section;
    for (const auto& ks : config_schema()) {
      if (hashed_only && !ks.hashed) continue;
      if (ks.section != section) {
        if (!section.empty()) out += "\n";
        section = ks.section;
        out += "[" + section + "]\n";
      }
      out += ks.key + " = " + text(ks.section, ks.key) + "\n";
    }
    return out;
  }
  std::string hash() const { return git_blob_hash(canonical(true)); }
};

namespace detail {

inline std::string normalize(const KeySpec& ks, const std::string& value, int line) {
  const std::string at = where(ks.section, ks.key, line);
  auto check_range = [&](double v) {
    if (v < ks.lo || v > ks.hi)
      throw ConfigError("config: " + at + ": value " + format_real(v) + " outside [" + format_real(ks.lo) + ", " +
                        format_real(ks.hi) + "]");
  };
  switch (ks.type) {
    case ValueType::Real: {
      const double v = parse_real(value, at);
      check_range(v);
      return format_real(v);
    }
    case ValueType::Int: {
      const long long v = parse_int(value, at);
      check_range(static_cast<double>(v));
      return std::to_string(v);
    }
    case ValueType::Bool: {
      if (value == "true" || value == "1" || value == "yes") return "true";
      if (value == "false" || value == "0" || value == "no") return "false";
      throw ConfigError("config: " + at + ": expected true or false, got '" + value + "'");
    }
    case ValueType::Choice: {
      for (const auto& c : ks.choices)
        if (c == value) return value;
      std::string list;
      for (const auto& c : ks.choices) list += (list.empty() ? "" : ", ") + c;
      throw ConfigError("config: " + at + ": '" + value + "' is not one of " + list);
    }
    case ValueType::RealList: {
      std::string out;
      for (const auto& item : split_list(value)) {
        const double v = parse_real(item, at);
        check_range(v);
        out += (out.empty() ? "" : ",") + format_real(v);
      }
      return out;
    }
    case ValueType::IntList: {
      std::string out;
      for (const auto& item : split_list(value)) {
        const long long v = parse_int(item, at);
        check_range(static_cast<double>(v));
        out += (out.empty() ? "" : ",") + std::to_string(v);
      }
      return out;
    }
    case ValueType::Text:
    case ValueType::Path:
      return value;
  }
  return value;
}

inline const KeySpec* find_key(const std::string& section, const std::string& key) {
  for (const auto& ks : config_schema())
    if (ks.section == section && ks.key == key) return &ks;
  return nullptr;
}

}  // namespace detail

// Cross-key checks that need the whole config.
inline void validate_config(const ExperimentConfig& c) {
  auto need_len = [&](const std::string& s, const std::string& k, std::size_t n, bool allow_empty) {
    const auto v = detail::split_list(c.text(s, k));
    if (allow_empty && v.empty()) return;
    if (v.size() != n)
      throw ConfigError("config: " + c.at(s, k) + ": expected " + std::to_string(n) + " values, got " +
                        std::to_string(v.size()));
  };
  const auto nodes = c.integers("grid", "nodes");
  if (nodes.size() != 1 && nodes.size() != 3)
    throw ConfigError("config: " + c.at("grid", "nodes") + ": expected 1 or 3 values");
  need_len("grid", "lo", 3, false);
  need_len("grid", "hi", 3, false);
  const auto lo = c.reals("grid", "lo"), hi = c.reals("grid", "hi");
  for (int a = 0; a < 3; ++a)
    if (!(hi[a] > lo[a])) throw ConfigError("config: " + c.at("grid", "hi") + ": hi must exceed lo on every axis");
  if (lo[0] <= 0) throw ConfigError("config: " + c.at("grid", "lo") + ": x must stay positive on the grid");
  need_len("chart", "lo", 3, false);
  need_len("chart", "hi", 3, false);
  need_len("chart", "phi_lin", 3, false);
  need_len("chart", "phi_quad", 3, false);
  need_len("field", "center", 3, true);
  const auto w = detail::split_list(c.text("field", "width"));
  if (w.size() != 0 && w.size() != 1 && w.size() != 3)
    throw ConfigError("config: " + c.at("field", "width") + ": expected 1 or 3 values");
  for (const auto& item : w)
    if (detail::parse_real(item, c.at("field", "width")) <= 0)
      throw ConfigError("config: " + c.at("field", "width") + ": widths must be positive");
  need_len("field", "direction", 3, false);
  need_len("field", "tensor", 9, false);
  if (c.text("chart", "kind") == "euclidean-ball-shell" && c.real("chart", "depth") >= c.real("chart", "radius"))
    throw ConfigError("config: " + c.at("chart", "depth") + ": depth must be smaller than the radius");
  auto need_file = [&](const std::string& s, const std::string& k) {
    const std::string p = c.path(s, k);
    if (p.empty()) throw ConfigError("config: " + c.at(s, k) + ": a file is required");
    if (!std::filesystem::exists(p)) throw ConfigError("config: " + c.at(s, k) + ": file '" + p + "' does not exist");
  };
  if (c.text("chart", "kind") == "grid-sampled") need_file("chart", "metric_file");
  if (c.text("field", "profile") == "file") need_file("field", "file");
  const auto levels = c.reals("layers", "levels");
  if (levels.empty()) throw ConfigError("config: " + c.at("layers", "levels") + ": at least one level is required");
  for (std::size_t j = 1; j < levels.size(); ++j)
    if (!(levels[j] > levels[j - 1])) throw ConfigError("config: " + c.at("layers", "levels") + ": levels must increase");
}

inline ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".") {
  ExperimentConfig c;
  c.base_dir = base_dir;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = detail::trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("config: line " + std::to_string(line) + ": malformed section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      bool known = false;
      for (const auto& ks : config_schema()) known = known || ks.section == section;
      if (!known) throw ConfigError("config: line " + std::to_string(line) + ": unknown section '" + section + "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("config: line " + std::to_string(line) + ": expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    std::string value = detail::trim(s.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config: line " + std::to_string(line) + ": key '" + key + "' appears before any section");
    const KeySpec* ks = detail::find_key(section, key);
    if (!ks) throw ConfigError("config: line " + std::to_string(line) + ": unknown key '" + key + "' in [" + section + "]");
    const std::string id = section + "." + key;
    if (c.raw.count(id))
      throw ConfigError("config: line " + std::to_string(line) + ": duplicate key '" + id + "'");
    c.raw[id] = {detail::normalize(*ks, value, line), line};
  }
  for (const auto& ks : config_schema()) {
    const std::string id = ks.section + "." + ks.key;
    if (!c.raw.count(id)) c.raw[id] = {detail::normalize(ks, ks.fallback, 0), 0};
  }
  validate_config(c);
  return c;
}

// Command-line override of a single key, validated like file input.
inline void override_key(ExperimentConfig& c, const std::string& section, const std::string& key,
                         const std::string& value) {
  const KeySpec* ks = detail::find_key(section, key);
  if (!ks) throw ConfigError("config: unknown key '" + section + "." + key + "'");
  c.raw[section + "." + key] = {detail::normalize(*ks, value, 0), 0};
  validate_config(c);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace mixray
