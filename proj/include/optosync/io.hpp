#pragma once

// CSV and JSON emission. Numbers are written in the shortest decimal form
// that round-trips exactly, independent of the C locale.

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "optosync/config.hpp"

namespace optosync {

inline std::string format_number(double value) {
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Infinity" : "-Infinity";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

inline void write_row(std::ostream& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << format_number(values[i]);
  }
  out << '\n';
}

inline std::vector<std::string> trajectory_columns() {
  std::vector<std::string> cols = {"t",  "q1", "p1", "re_a1", "im_a1",
                                   "q2", "p2", "re_a2", "im_a2"};
  for (int i = 1; i <= 8; ++i) {
    for (int j = i; j <= 8; ++j) cols.push_back("v" + std::to_string(i) + std::to_string(j));
  }
  return cols;
}

inline const std::vector<std::string>& measures_columns() {
  static const std::vector<std::string> cols = {
      "t",    "s_q",  "s_phi", "s_p",     "s_anti",    "s_c",     "phi1",
      "phi2", "phi",  "avg_s_q", "avg_s_phi", "avg_s_p", "avg_s_anti"};
  return cols;
}

inline const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "param_name", "param_value", "avg_s_q", "avg_s_phi",     "avg_s_p",      "avg_s_anti",
      "avg_s_c",    "phi",         "steady_reached", "max_real_eig", "status"};
  return cols;
}

inline void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    out << cols[i];
  }
  out << '\n';
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  write_header(out, trajectory_columns());
  std::vector<double> row;
  row.reserve(45);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    row.clear();
    row.push_back(traj.times[k]);
    for (int i = 0; i < 8; ++i) row.push_back(traj.means[k].v[i]);
    for (int i = 0; i < 8; ++i) {
      for (int j = i; j < 8; ++j) row.push_back(traj.covs[k](i, j));
    }
    write_row(out, row);
  }
}

inline void write_measures_csv(std::ostream& out, const MeasureSeries& m) {
  write_header(out, measures_columns());
  for (std::size_t k = 0; k < m.times.size(); ++k) {
    const std::array<double, 13> row = {
        m.times[k],      m.s_q[k],       m.s_phi[k],     m.s_p[k],         m.s_anti[k],
        m.s_c[k],        m.phase[k].phi1, m.phase[k].phi2, m.phase[k].phi, m.avg_s_q[k],
        m.avg_s_phi[k],  m.avg_s_p[k],   m.avg_s_anti[k]};
    write_row(out, row);
  }
}

inline void write_sweep_csv(std::ostream& out, SweepParam param, std::span<const SweepRow> rows) {
  write_header(out, sweep_columns());
  for (const auto& r : rows) {
    out << to_string(param) << ',';
    const std::array<double, 7> nums = {r.param_value, r.avg_s_q,    r.avg_s_phi, r.avg_s_p,
                                        r.avg_s_anti,  r.avg_s_c,    r.phi};
    for (double v : nums) out << format_number(v) << ',';
    out << (r.steady_reached ? "true" : "false") << ',' << format_number(r.max_real_eig) << ','
        << r.status << '\n';
  }
}

/// Parsed numeric CSV: header names plus rows of doubles.
struct NumericTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline NumericTable read_numeric_csv(std::istream& in) {
  NumericTable table;
  std::string line;
  auto split = [](std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
      const auto comma = s.find(',', pos);
      out.push_back(s.substr(pos, comma == std::string_view::npos ? s.npos : comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return out;
  };
  if (!std::getline(in, line)) throw IoError("empty CSV");
  for (auto c : split(line)) table.columns.emplace_back(c);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    for (auto field : split(line)) row.push_back(detail::parse_double(field, "csv", line_no));
    if (row.size() != table.columns.size()) throw IoError("ragged CSV row " + std::to_string(line_no));
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline nlohmann::json steady_json(const RunSummary& s) {
  nlohmann::json j;
  j["reached"] = s.steady.reached;
  j["onset_time"] = s.steady.onset_time;
  j["period_used"] = s.steady.period_used;
  j["period_multiple"] = s.steady.period_multiple;
  j["residual"] = s.steady.residual;
  j["window"] = {{"begin", s.window.begin}, {"end", s.window.end}};
  j["phi"] = s.phi;
  j["avg_s_q"] = s.avg_s_q;
  j["avg_s_phi"] = s.avg_s_phi;
  j["avg_s_p"] = s.avg_s_p;
  j["avg_s_anti"] = s.avg_s_anti;
  j["avg_s_c"] = s.avg_s_c;
  j["max_real_eig"] = s.stability.worst();
  j["all_negative"] = s.stability.all_negative;
  return j;
}

inline nlohmann::json stability_json(const StabilityReport& r) {
  nlohmann::json j;
  j["sample_times"] = r.sample_times;
  j["max_real_eig"] = r.max_real_eig;
  j["all_negative"] = r.all_negative;
  return j;
}

inline nlohmann::json config_json(const RunConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : config_entries(config)) j[key] = value;
  return j;
}

/// Loads a configuration from either a key=value text file or a
/// manifest.json written by a previous run (its "config" object).
inline RunConfig load_config(const std::string& path) {
  const std::string text = read_text_file(path);
  if (path.size() >= 5 && path.ends_with(".json")) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigParse(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object()) {
      throw ConfigParse("manifest has no 'config' object");
    }
    RunConfig config;
    for (const auto& [key, value] : doc["config"].items()) {
      if (!value.is_number()) throw ConfigParse("non-numeric value for key '" + key + "'");
      set_config_value(config, key, format_number(value.get<double>()));
    }
    return config;
  }
  return parse_config(text);
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace optosync
