#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcse/agents.hpp"
#include "mcse/darts.hpp"
#include "mcse/error.hpp"

namespace mcse::io {

// Shortest text that reads back to the same double; fixed across runs.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "nan" || s == "NaN" || s == "NA") return std::nan("");
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError("not a number: '" + std::string(s) + "'");
  return v;
}

// Splits one delimited line. Fields may be double-quoted; "" inside quotes is
// a literal quote.
inline std::vector<std::string> split_line(std::string_view line, char delim = ',') {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  out.push_back(std::move(field));
  return out;
}

inline std::string quote_field(std::string_view s, char delim = ',') {
  if (s.find_first_of(std::string{delim, '"', '\n', '\r'}) == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields, char delim = ',') {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << delim;
    os << quote_field(fields[i], delim);
  }
  os << '\n';
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
  std::size_t column(std::string_view name) const {
    auto c = find(name);
    if (!c) throw DataError("missing column '" + std::string(name) + "'");
    return *c;
  }
};

inline Table read_table(std::istream& is, char delim = ',') {
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line, delim);
    if (!have_header) {
      if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    fields.resize(t.header.size());
    t.rows.push_back(std::move(fields));
  }
  if (!have_header) throw DataError("empty table");
  return t;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open '" + path.string() + "'");
  return is;
}

inline Table read_table(const std::filesystem::path& path, char delim = ',') {
  auto is = open_input(path);
  return read_table(is, delim);
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write '" + path.string() + "'");
  return os;
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  auto is = open_input(path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad JSON in '" + path.string() + "': " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
}

// Observations: obs_index,state_id,x,y

inline const std::vector<std::string> kObservationHeader = {"obs_index", "state_id", "x", "y"};

inline void write_observations(std::ostream& os, const std::vector<Observation>& obs) {
  write_row(os, kObservationHeader);
  for (std::size_t i = 0; i < obs.size(); ++i)
    write_row(os, {std::to_string(i), std::to_string(obs[i].state_id), format_number(obs[i].executed.x),
                   format_number(obs[i].executed.y)});
}

inline std::vector<Observation> read_observations(std::istream& is) {
  const Table t = read_table(is);
  const auto ci = t.column("obs_index"), cs = t.column("state_id"), cx = t.column("x"), cy = t.column("y");
  std::vector<Observation> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (static_cast<std::size_t>(parse_number(row[ci])) != r) throw DataError("observations out of order at row " + std::to_string(r + 1));
    Observation o{static_cast<std::int64_t>(parse_number(row[cs])), {parse_number(row[cx]), parse_number(row[cy])}};
    if (!std::isfinite(o.executed.x) || !std::isfinite(o.executed.y))
      throw DataError("non-finite observation at row " + std::to_string(r + 1));
    out.push_back(o);
  }
  return out;
}

// States: one JSON object per line.

inline void write_states(std::ostream& os, const std::vector<darts::DartboardState>& states) {
  for (const auto& s : states) os << darts::to_json(s).dump() << '\n';
}

inline std::vector<darts::DartboardState> read_states(std::istream& is, const darts::BoardGeometry& geometry = {}) {
  std::vector<darts::DartboardState> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(darts::state_from_json(nlohmann::json::parse(line), geometry));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("bad state record on line " + std::to_string(n) + ": " + e.what());
    } catch (const InvalidParameter& e) {
      throw DataError("bad state record on line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

// Estimator trace.

struct TraceRow {
  std::size_t obs_index = 0;
  double sigma_x = 0.0, sigma_y = 0.0, rho = 0.0, lambda = 0.0;
  double neff = 0.0;
  bool resampled = false;
  std::optional<double> jd;
};

inline const std::vector<std::string> kTraceHeader = {"obs_index", "est_sigma_x", "est_sigma_y",    "est_rho",
                                                      "est_lambda", "neff",        "resampled_flag", "jd_if_truth_known"};

inline void write_trace(std::ostream& os, const std::vector<TraceRow>& rows) {
  write_row(os, kTraceHeader);
  for (const auto& r : rows)
    write_row(os, {std::to_string(r.obs_index), format_number(r.sigma_x), format_number(r.sigma_y), format_number(r.rho),
                   format_number(r.lambda), format_number(r.neff), r.resampled ? "1" : "0",
                   r.jd ? format_number(*r.jd) : ""});
}

inline std::vector<TraceRow> read_trace(std::istream& is) {
  const Table t = read_table(is);
  std::vector<std::size_t> c;
  for (const auto& name : kTraceHeader) c.push_back(t.column(name));
  std::vector<TraceRow> out;
  for (const auto& row : t.rows) {
    TraceRow r;
    r.obs_index = static_cast<std::size_t>(parse_number(row[c[0]]));
    r.sigma_x = parse_number(row[c[1]]);
    r.sigma_y = parse_number(row[c[2]]);
    r.rho = parse_number(row[c[3]]);
    r.lambda = parse_number(row[c[4]]);
    r.neff = parse_number(row[c[5]]);
    r.resampled = row[c[6]] == "1";
    if (!row[c[7]].empty()) r.jd = parse_number(row[c[7]]);
    out.push_back(r);
  }
  return out;
}

}  // namespace mcse::io
