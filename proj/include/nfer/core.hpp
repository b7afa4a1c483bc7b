// Base value model: identifiers, data maps, events, intervals, pools.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace nfer {

// Nonnegative arbitrary-precision integer. Negative values never escape a
// constructor or operation; truncated subtraction clamps at zero.
using Nat = boost::multiprecision::cpp_int;

inline std::size_t hash_combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

// Positioned error for any textual input. Column 0 means "whole line".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : std::runtime_error(render(line, column, message)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string render(std::size_t line, std::size_t column, const std::string& message) {
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    out += ": " + message;
    return out;
  }
  std::size_t line_;
  std::size_t column_;
};

inline std::size_t nat_hash(const Nat& n) { return hash_value(n); }

// Bits needed to write n in binary; 1 for 0 and 1.
inline Nat bit_length(const Nat& n) {
  if (n <= 1) return 1;
  return Nat(boost::multiprecision::msb(n)) + 1;
}

class Identifier {
 public:
  Identifier() = default;
  explicit Identifier(std::string name) : name_(std::move(name)) {
    if (name_.empty()) throw std::invalid_argument("identifier must be nonempty");
    for (unsigned char c : name_) {
      if (std::isspace(c)) throw std::invalid_argument("identifier must not contain whitespace");
    }
  }
  const std::string& name() const { return name_; }
  friend bool operator==(const Identifier& a, const Identifier& b) { return a.name_ == b.name_; }
  friend bool operator!=(const Identifier& a, const Identifier& b) { return a.name_ != b.name_; }
  friend bool operator<(const Identifier& a, const Identifier& b) { return a.name_ < b.name_; }

 private:
  std::string name_;
};

struct IdentifierHash {
  std::size_t operator()(const Identifier& id) const { return std::hash<std::string>{}(id.name()); }
};

// Runtime values are naturals or booleans; no other kinds exist.
using Value = std::variant<Nat, bool>;

inline bool is_nat(const Value& v) { return std::holds_alternative<Nat>(v); }
inline bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }
inline const Nat& as_nat(const Value& v) { return std::get<Nat>(v); }
inline bool as_bool(const Value& v) { return std::get<bool>(v); }

inline std::string value_text(const Value& v) {
  if (is_bool(v)) return as_bool(v) ? "true" : "false";
  return as_nat(v).str();
}

// Total order on values: every Bool precedes every Nat, false < true,
// Nats by magnitude.
inline int value_order(const Value& a, const Value& b) {
  if (is_bool(a) && is_nat(b)) return -1;
  if (is_nat(a) && is_bool(b)) return 1;
  if (is_bool(a)) {
    return int(as_bool(a)) - int(as_bool(b));
  }
  if (as_nat(a) < as_nat(b)) return -1;
  if (as_nat(b) < as_nat(a)) return 1;
  return 0;
}

inline std::size_t value_hash(const Value& v) {
  if (is_bool(v)) return as_bool(v) ? 3 : 2;
  return hash_combine(1, nat_hash(as_nat(v)));
}

// Finite partial map from identifiers to values, stored key-sorted.
class ValueMap {
 public:
  using Entry = std::pair<Identifier, Value>;

  ValueMap() = default;

  // Inserts or overwrites.
  void set(Identifier key, Value v) {
    auto it = lower_bound(key);
    if (it != entries_.end() && it->first == key) {
      it->second = std::move(v);
    } else {
      entries_.insert(it, Entry{std::move(key), std::move(v)});
    }
  }

  const Value* find(const Identifier& key) const {
    auto it = lower_bound(key);
    if (it != entries_.end() && it->first == key) return &it->second;
    return nullptr;
  }

  bool contains(const Identifier& key) const { return find(key) != nullptr; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  friend bool operator==(const ValueMap& a, const ValueMap& b) { return a.entries_ == b.entries_; }
  friend bool operator!=(const ValueMap& a, const ValueMap& b) { return !(a == b); }

 private:
  std::vector<Entry>::const_iterator lower_bound(const Identifier& key) const {
    return std::lower_bound(entries_.begin(), entries_.end(), key,
                            [](const Entry& e, const Identifier& k) { return e.first < k; });
  }
  std::vector<Entry>::iterator lower_bound(const Identifier& key) {
    return std::lower_bound(entries_.begin(), entries_.end(), key,
                            [](const Entry& e, const Identifier& k) { return e.first < k; });
  }

  std::vector<Entry> entries_;
};

// Total order on maps: entry lists compared lexicographically, keys by name,
// values by value_order; a strict prefix precedes its extensions.
inline int map_order(const ValueMap& a, const ValueMap& b) {
  const auto& ea = a.entries();
  const auto& eb = b.entries();
  std::size_t n = std::min(ea.size(), eb.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (ea[i].first < eb[i].first) return -1;
    if (eb[i].first < ea[i].first) return 1;
    int v = value_order(ea[i].second, eb[i].second);
    if (v != 0) return v;
  }
  if (ea.size() < eb.size()) return -1;
  if (eb.size() < ea.size()) return 1;
  return 0;
}

// Canonical text form, also the CSV data cell: "k=v;k2=v2", empty for {}.
inline std::string map_text(const ValueMap& m) {
  std::string out;
  bool first = true;
  for (const auto& [k, v] : m.entries()) {
    if (!first) out += ';';
    first = false;
    out += k.name();
    out += '=';
    out += value_text(v);
  }
  return out;
}

inline std::size_t map_hash(const ValueMap& m) {
  std::size_t h = 17;
  for (const auto& [k, v] : m.entries()) {
    h = hash_combine(h, IdentifierHash{}(k));
    h = hash_combine(h, value_hash(v));
  }
  return h;
}

struct Event {
  Identifier id;
  Nat time;
  ValueMap map;

  Event(Identifier id_, Nat time_, ValueMap map_ = {})
      : id(std::move(id_)), time(std::move(time_)), map(std::move(map_)) {
    if (time < 0) throw std::invalid_argument("event time must be nonnegative");
  }

  friend bool operator==(const Event& a, const Event& b) {
    return a.id == b.id && a.time == b.time && a.map == b.map;
  }
};

struct Trace {
  std::vector<Event> events;

  friend bool operator==(const Trace& a, const Trace& b) { return a.events == b.events; }
};

struct Interval {
  Identifier id;
  Nat start;
  Nat end;
  ValueMap map;

  Interval(Identifier id_, Nat start_, Nat end_, ValueMap map_ = {})
      : id(std::move(id_)), start(std::move(start_)), end(std::move(end_)), map(std::move(map_)) {
    if (start < 0) throw std::invalid_argument("interval start must be nonnegative");
    if (end < start) throw std::invalid_argument("interval end must not precede start");
  }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.start == b.start && a.end == b.end && a.id == b.id && a.map == b.map;
  }
  friend bool operator!=(const Interval& a, const Interval& b) { return !(a == b); }
};

struct IntervalHash {
  std::size_t operator()(const Interval& iv) const {
    std::size_t h = IdentifierHash{}(iv.id);
    h = hash_combine(h, nat_hash(iv.start));
    h = hash_combine(h, nat_hash(iv.end));
    h = hash_combine(h, map_hash(iv.map));
    return h;
  }
};

// Canonical enumeration order for emission: (start, end, id, map text).
inline bool canonical_less(const Interval& a, const Interval& b) {
  if (a.start != b.start) return a.start < b.start;
  if (a.end != b.end) return a.end < b.end;
  if (a.id != b.id) return a.id < b.id;
  return map_text(a.map) < map_text(b.map);
}

// A set of intervals that remembers insertion order. Iteration over items()
// is deterministic; canonical() gives the emission order.
class Pool {
 public:
  Pool() = default;

  // False when the interval was already present.
  bool insert(Interval iv) {
    auto [it, fresh] = seen_.insert(iv);
    (void)it;
    if (fresh) items_.push_back(std::move(iv));
    return fresh;
  }

  bool contains(const Interval& iv) const { return seen_.count(iv) > 0; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const std::vector<Interval>& items() const { return items_; }

  std::vector<Interval> canonical() const {
    std::vector<Interval> out = items_;
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
  }

  // Set equality; insertion order is irrelevant.
  friend bool operator==(const Pool& a, const Pool& b) {
    if (a.size() != b.size()) return false;
    for (const Interval& iv : a.items_) {
      if (!b.contains(iv)) return false;
    }
    return true;
  }
  friend bool operator!=(const Pool& a, const Pool& b) { return !(a == b); }

 private:
  std::vector<Interval> items_;
  std::unordered_set<Interval, IntervalHash> seen_;
};

// Every event becomes a zero-duration interval at its timestamp.
inline Pool init(const Trace& trace) {
  Pool pool;
  for (const Event& e : trace.events) {
    pool.insert(Interval(e.id, e.time, e.time, e.map));
  }
  return pool;
}

}  // namespace nfer
