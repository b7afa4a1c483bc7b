// Trace input (JSON lines or CSV) and deterministic pool/trace emission.
#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nfer/core.hpp"
#include "nfer/engine.hpp"

namespace nfer {

enum class DataFormat { jsonl, csv };

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  }
  return lines;
}

inline bool blank(std::string_view line) {
  for (char c : line) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline Identifier parse_identifier(std::string_view name, std::size_t line) {
  try {
    return Identifier(std::string(name));
  } catch (const std::invalid_argument& e) {
    throw ParseError(line, 0, e.what());
  }
}

inline Value parse_scalar(std::string_view text, std::size_t line) {
  if (text == "true") return Value(true);
  if (text == "false") return Value(false);
  if (all_digits(text)) return Value(Nat(std::string(text)));
  throw ParseError(line, 0, "expected a natural number, 'true', or 'false'; got '" +
                                std::string(text) + "'");
}

inline std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t at = text.find(sep, pos);
    if (at == std::string_view::npos) {
      parts.push_back(text.substr(pos));
      return parts;
    }
    parts.push_back(text.substr(pos, at - pos));
    pos = at + 1;
  }
}

// "k=v;k2=v2", empty for the empty map. Mirrors map_text.
inline ValueMap parse_data_cell(std::string_view cell, std::size_t line) {
  ValueMap map;
  if (cell.empty()) return map;
  for (std::string_view item : split_on(cell, ';')) {
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(line, 0, "expected key=value in data cell; got '" + std::string(item) + "'");
    }
    Identifier key = parse_identifier(item.substr(0, eq), line);
    if (map.contains(key)) {
      throw ParseError(line, 0, "duplicate key '" + key.name() + "' in data cell");
    }
    map.set(std::move(key), parse_scalar(item.substr(eq + 1), line));
  }
  return map;
}

inline Trace parse_trace_jsonl(const std::vector<std::string_view>& lines) {
  Trace trace;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = lines[n];
    if (blank(line)) continue;
    std::size_t lineno = n + 1;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(lineno, 0, e.what());
    }
    if (!j.is_object()) throw ParseError(lineno, 0, "each line must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      (void)value;
      if (key != "name" && key != "time" && key != "data") {
        throw ParseError(lineno, 0, "unknown field '" + key + "'");
      }
    }
    if (!j.contains("name") || !j["name"].is_string()) {
      throw ParseError(lineno, 0, "field 'name' must be a string");
    }
    if (!j.contains("time") || !j["time"].is_number_unsigned()) {
      throw ParseError(lineno, 0, "field 'time' must be a nonnegative integer");
    }
    Identifier id = parse_identifier(j["name"].get<std::string>(), lineno);
    Nat time(j["time"].get<std::uint64_t>());
    ValueMap map;
    if (j.contains("data")) {
      if (!j["data"].is_object()) throw ParseError(lineno, 0, "field 'data' must be an object");
      for (const auto& [key, value] : j["data"].items()) {
        Identifier k = parse_identifier(key, lineno);
        if (value.is_boolean()) {
          map.set(std::move(k), Value(value.get<bool>()));
        } else if (value.is_number_unsigned()) {
          map.set(std::move(k), Value(Nat(value.get<std::uint64_t>())));
        } else {
          throw ParseError(lineno, 0, "data value for '" + key +
                                          "' must be a nonnegative integer or boolean");
        }
      }
    }
    trace.events.push_back(Event(std::move(id), std::move(time), std::move(map)));
  }
  return trace;
}

inline Trace parse_trace_csv(const std::vector<std::string_view>& lines) {
  Trace trace;
  bool seen_header = false;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string_view line = lines[n];
    if (blank(line)) continue;
    std::size_t lineno = n + 1;
    if (!seen_header) {
      if (line != "name,time,data") {
        throw ParseError(lineno, 0, "expected header 'name,time,data'");
      }
      seen_header = true;
      continue;
    }
    auto fields = split_on(line, ',');
    if (fields.size() != 3) {
      throw ParseError(lineno, 0, "expected 3 fields (name,time,data), got " +
                                      std::to_string(fields.size()));
    }
    Identifier id = parse_identifier(fields[0], lineno);
    if (!all_digits(fields[1])) {
      throw ParseError(lineno, 0, "time must be a nonnegative integer");
    }
    Nat time{std::string(fields[1])};
    trace.events.push_back(Event(std::move(id), std::move(time), parse_data_cell(fields[2], lineno)));
  }
  return trace;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          static const char* hex = "0123456789abcdef";
          out += "\\u00";
          out += hex[(c >> 4) & 0xf];
          out += hex[c & 0xf];
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Keys emit in map order, so output is canonical.
inline void append_json_map(const ValueMap& map, std::string& out) {
  out += '{';
  bool first = true;
  for (const auto& [k, v] : map.entries()) {
    if (!first) out += ',';
    first = false;
    out += '"';
    out += json_escape(k.name());
    out += "\":";
    out += value_text(v);
  }
  out += '}';
}

}  // namespace detail

/// Parses a trace. With no explicit format, a first non-blank character of
/// '{' means JSON lines, anything else CSV. Empty input is an empty trace.
inline Trace parse_trace(std::string_view text,
                         std::optional<DataFormat> format = std::nullopt) {
  auto lines = detail::split_lines(text);
  if (!format) {
    format = DataFormat::csv;
    for (std::string_view line : lines) {
      if (detail::blank(line)) continue;
      for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '{') format = DataFormat::jsonl;
        break;
      }
      break;
    }
  }
  return *format == DataFormat::jsonl ? detail::parse_trace_jsonl(lines)
                                      : detail::parse_trace_csv(lines);
}

inline std::string emit_trace(const Trace& trace, DataFormat format) {
  std::string out;
  if (format == DataFormat::csv) {
    out += "name,time,data\n";
    for (const Event& e : trace.events) {
      out += e.id.name();
      out += ',';
      out += e.time.str();
      out += ',';
      out += map_text(e.map);
      out += '\n';
    }
    return out;
  }
  for (const Event& e : trace.events) {
    out += "{\"name\":\"";
    out += detail::json_escape(e.id.name());
    out += "\",\"time\":";
    out += e.time.str();
    out += ",\"data\":";
    detail::append_json_map(e.map, out);
    out += "}\n";
  }
  return out;
}

/// Pool emission in canonical interval order; byte-stable across runs.
inline std::string emit_pool(const EvalResult& result, DataFormat format) {
  std::string out;
  std::vector<Interval> sorted = result.pool.canonical();
  if (format == DataFormat::csv) {
    out += "name,start,end,data\n";
    for (const Interval& iv : sorted) {
      out += iv.id.name();
      out += ',';
      out += iv.start.str();
      out += ',';
      out += iv.end.str();
      out += ',';
      out += map_text(iv.map);
      out += '\n';
    }
    return out;
  }
  for (const Interval& iv : sorted) {
    out += "{\"name\":\"";
    out += detail::json_escape(iv.id.name());
    out += "\",\"start\":";
    out += iv.start.str();
    out += ",\"end\":";
    out += iv.end.str();
    out += ",\"data\":";
    detail::append_json_map(iv.map, out);
    out += "}\n";
  }
  return out;
}

// One-line run summary for a diagnostic channel.
inline std::string pool_summary(const EvalResult& result) {
  std::string out = "intervals=" + std::to_string(result.pool.size());
  out += " iterations=" + std::to_string(result.iterations);
  out += " saturated=";
  out += result.saturated ? "true" : "false";
  return out;
}

}  // namespace nfer
