#pragma once

// Plain-text run configuration: one `key = value` per line, `#` starts a
// comment. Keys not present keep their defaults; unknown keys are errors.

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "optosync/sweep.hpp"

namespace optosync {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view text, std::string_view key, int line) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ConfigParse("invalid number '" + std::string(text) + "' for key '" + std::string(key) +
                          "'",
                      line);
  }
  return value;
}

struct KeyBinding {
  std::string_view key;
  std::function<void(RunConfig&, double)> set;
  std::function<double(const RunConfig&)> get;
};

inline const std::vector<KeyBinding>& key_bindings() {
  auto param = [](std::string_view key, double SystemParams::*field) {
    return KeyBinding{key, [field](RunConfig& c, double v) { c.params.*field = v; },
                      [field](const RunConfig& c) { return c.params.*field; }};
  };
  static const std::vector<KeyBinding> bindings = {
      param("delta1", &SystemParams::delta1),
      param("delta2", &SystemParams::delta2),
      param("omega1", &SystemParams::omega1),
      param("omega2", &SystemParams::omega2),
      param("g", &SystemParams::g),
      param("gamma", &SystemParams::gamma),
      param("kappa", &SystemParams::kappa),
      param("E", &SystemParams::E),
      param("lambda", &SystemParams::lambda),
      param("A_c", &SystemParams::A_c),
      param("omega_c", &SystemParams::omega_c),
      param("n_bath", &SystemParams::n_bath),
      {"dt", [](RunConfig& c, double v) { c.numerics.dt = v; },
       [](const RunConfig& c) { return c.numerics.resolved_dt(c.params); }},
      {"t_end", [](RunConfig& c, double v) { c.numerics.t_end = v; },
       [](const RunConfig& c) { return c.numerics.t_end; }},
      {"transient_fraction", [](RunConfig& c, double v) { c.numerics.transient_fraction = v; },
       [](const RunConfig& c) { return c.numerics.transient_fraction; }},
      {"record_stride",
       [](RunConfig& c, double v) {
         if (v != std::floor(v) || v < 1 || v > 1e9) {
           throw InvalidParams("record_stride must be a positive integer");
         }
         c.numerics.record_stride = static_cast<int>(v);
       },
       [](const RunConfig& c) { return static_cast<double>(c.numerics.record_stride); }},
  };
  return bindings;
}

}  // namespace detail

/// Sets one key. Throws ConfigParse naming the key if it is unknown or the
/// value is malformed.
inline void set_config_value(RunConfig& config, std::string_view key, std::string_view value,
                             int line = 0) {
  for (const auto& b : detail::key_bindings()) {
    if (b.key == key) {
      const double v = detail::parse_double(value, key, line);
      try {
        b.set(config, v);
      } catch (const InvalidParams& e) {
        throw ConfigParse(e.what(), line);
      }
      return;
    }
  }
  throw ConfigParse("unknown key '" + std::string(key) + "'", line);
}

/// Applies a `key=value` override on top of an existing configuration.
inline void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigParse("override must look like key=value: '" + std::string(assignment) + "'");
  }
  set_config_value(config, detail::trim(assignment.substr(0, eq)),
                   detail::trim(assignment.substr(eq + 1)));
}

/// Parses configuration text on top of the defaults (no validation).
inline RunConfig parse_config(std::string_view text, RunConfig config = RunConfig{}) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigParse("expected 'key = value'", line_no);
    }
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigParse("missing key", line_no);
    set_config_value(config, key, value, line_no);
  }
  return config;
}

/// Checks the physical and numerical ranges; failures surface as ConfigParse.
inline void validate_config(const RunConfig& config) {
  try {
    config.params.validate();
    config.numerics.validate();
  } catch (const InvalidParams& e) {
    throw ConfigParse(std::string("invalid configuration: ") + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return buf.str();
}

/// Every configuration key with its value, in canonical order. `dt` is
/// omitted while it is automatic.
inline std::vector<std::pair<std::string, double>> config_entries(const RunConfig& config) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& b : detail::key_bindings()) {
    // An automatic step stays automatic so per-point sweeps re-resolve it.
    if (b.key == "dt" && !config.numerics.dt) continue;
    out.emplace_back(std::string(b.key), b.get(config));
  }
  return out;
}

}  // namespace optosync
