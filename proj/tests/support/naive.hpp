// Independent reference semantics for differential testing: plain set
// representation, quadratic loops, no indexes or join strategies shared
// with the library implementation.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "nfer/analysis.hpp"
#include "nfer/core.hpp"
#include "nfer/engine.hpp"

namespace oracle {

using nfer::Identifier;
using nfer::Interval;
using nfer::Nat;
using nfer::Trace;
using nfer::Value;
using nfer::ValueMap;

using Set = std::vector<Interval>;

inline bool set_contains(const Set& s, const Interval& iv) {
  return std::find(s.begin(), s.end(), iv) != s.end();
}

inline void set_add(Set& s, const Interval& iv) {
  if (!set_contains(s, iv)) s.push_back(iv);
}

inline bool set_equal(const Set& a, const Set& b) {
  if (a.size() != b.size()) return false;
  for (const Interval& iv : a) {
    if (!set_contains(b, iv)) return false;
  }
  return true;
}

// --- expression evaluation ---------------------------------------------------

using Modulus = std::optional<Nat>;

inline Nat mod_reduce(Nat v, const Modulus& k) {
  if (k) v = v % *k;
  return v;
}

inline std::optional<Value> eval(const nfer::ExprPtr& e, const ValueMap& am, const ValueMap& bm,
                                 const Modulus& k) {
  using namespace nfer;
  const auto& node = e->node();
  if (const auto* lit = std::get_if<NatLiteral>(&node)) return Value(mod_reduce(lit->value, k));
  if (const auto* lit = std::get_if<BoolLiteral>(&node)) return Value(lit->value);
  if (const auto* f = std::get_if<FieldRef>(&node)) {
    const ValueMap& m = f->side == OperandSide::left ? am : bm;
    const Value* v = m.find(f->key);
    if (v == nullptr) return std::nullopt;
    if (is_nat(*v)) return Value(mod_reduce(as_nat(*v), k));
    return *v;
  }
  if (const auto* neg = std::get_if<NotExpr>(&node)) {
    auto v = eval(neg->operand, am, bm, k);
    if (!v.has_value() || !is_bool(*v)) return std::nullopt;
    return Value(!as_bool(*v));
  }
  const auto& b = std::get<BinaryExpr>(node);
  auto lv = eval(b.lhs, am, bm, k);
  auto rv = eval(b.rhs, am, bm, k);
  if (!lv.has_value() || !rv.has_value()) return std::nullopt;

  bool arith = b.op == BinaryOp::add || b.op == BinaryOp::sub || b.op == BinaryOp::mul ||
               b.op == BinaryOp::div || b.op == BinaryOp::mod;
  bool order = b.op == BinaryOp::lt || b.op == BinaryOp::le || b.op == BinaryOp::gt ||
               b.op == BinaryOp::ge;
  if (arith || order) {
    if (!is_nat(*lv) || !is_nat(*rv)) return std::nullopt;
    Nat x = as_nat(*lv);
    Nat y = as_nat(*rv);
    if (b.op == BinaryOp::add) return Value(mod_reduce(x + y, k));
    if (b.op == BinaryOp::sub) {
      if (k) return Value(mod_reduce(mod_reduce(x, k) + *k - mod_reduce(y, k), k));
      return Value(x >= y ? Nat(x - y) : Nat(0));
    }
    if (b.op == BinaryOp::mul) return Value(mod_reduce(x * y, k));
    if (b.op == BinaryOp::div) {
      if (y == 0) return std::nullopt;
      return Value(mod_reduce(x / y, k));
    }
    if (b.op == BinaryOp::mod) {
      if (y == 0) return std::nullopt;
      return Value(mod_reduce(x % y, k));
    }
    if (b.op == BinaryOp::lt) return Value(x < y);
    if (b.op == BinaryOp::le) return Value(x <= y);
    if (b.op == BinaryOp::gt) return Value(x > y);
    return Value(x >= y);
  }
  if (b.op == BinaryOp::eq) {
    if (is_nat(*lv) != is_nat(*rv)) return std::nullopt;
    return Value(*lv == *rv);
  }
  if (!is_bool(*lv) || !is_bool(*rv)) return std::nullopt;
  if (b.op == BinaryOp::logical_and) return Value(as_bool(*lv) && as_bool(*rv));
  return Value(as_bool(*lv) || as_bool(*rv));
}

inline bool predicate_holds(const nfer::MapPredicate& phi, const ValueMap& am, const ValueMap& bm,
                            const Modulus& k) {
  auto v = eval(phi.body, am, bm, k);
  return v.has_value() && nfer::is_bool(*v) && nfer::as_bool(*v);
}

inline std::optional<ValueMap> build_map(const nfer::MapUpdate& psi, const ValueMap& am,
                                         const ValueMap& bm, const Modulus& k) {
  ValueMap out;
  for (const auto& a : psi.assignments) {
    auto v = eval(a.value, am, bm, k);
    if (!v.has_value()) return std::nullopt;
    out.set(a.key, *v);
  }
  return out;
}

// --- relation table ----------------------------------------------------------

inline std::optional<std::pair<Nat, Nat>> window(nfer::InclusiveOp op, const Interval& x,
                                                 const Interval& y) {
  using nfer::InclusiveOp;
  switch (op) {
    case InclusiveOp::before:
      if (x.end < y.start) return std::make_pair(x.start, y.end);
      break;
    case InclusiveOp::meet:
      if (x.end == y.start) return std::make_pair(x.start, y.end);
      break;
    case InclusiveOp::during:
      if (y.start <= x.start && x.end <= y.end) return std::make_pair(y.start, y.end);
      break;
    case InclusiveOp::coincide:
      if (x.start == y.start && x.end == y.end) return std::make_pair(x.start, x.end);
      break;
    case InclusiveOp::start:
      if (x.start == y.start) return std::make_pair(x.start, x.end > y.end ? x.end : y.end);
      break;
    case InclusiveOp::finish:
      if (x.end == y.end) return std::make_pair(x.start < y.start ? x.start : y.start, x.end);
      break;
    case InclusiveOp::overlap:
      if (x.start < y.end && y.start < x.end) {
        return std::make_pair(x.start < y.start ? x.start : y.start,
                              x.end > y.end ? x.end : y.end);
      }
      break;
    case InclusiveOp::slice:
      if (x.start < y.end && y.start < x.end) {
        return std::make_pair(x.start > y.start ? x.start : y.start,
                              x.end < y.end ? x.end : y.end);
      }
      break;
  }
  return std::nullopt;
}

inline bool blocks(nfer::ExclusiveOp op, const Interval& x, const Interval& y) {
  using nfer::ExclusiveOp;
  switch (op) {
    case ExclusiveOp::after: return x.start > y.end;
    case ExclusiveOp::follow: return y.end == x.start;
    case ExclusiveOp::contain: return x.start <= y.start && y.end <= x.end;
  }
  return false;
}

// --- rule application --------------------------------------------------------

inline Set rule_step(const nfer::Rule& rule, const Set& pool, const Modulus& k) {
  Set out;
  if (const auto* inc = std::get_if<nfer::InclusiveRule>(&rule)) {
    for (const Interval& x : pool) {
      if (x.id != inc->left) continue;
      for (const Interval& y : pool) {
        if (y.id != inc->right) continue;
        auto w = window(inc->op, x, y);
        if (!w.has_value()) continue;
        if (!predicate_holds(inc->phi, x.map, y.map, k)) continue;
        auto m = build_map(inc->psi, x.map, y.map, k);
        if (!m.has_value()) continue;
        set_add(out, Interval(inc->lhs, w->first, w->second, *m));
      }
    }
    return out;
  }
  const auto& exc = std::get<nfer::ExclusiveRule>(rule);
  for (const Interval& x : pool) {
    if (x.id != exc.included) continue;
    bool blocked = false;
    for (const Interval& y : pool) {
      if (y.id != exc.excluded) continue;
      if (blocks(exc.op, x, y) && predicate_holds(exc.phi, x.map, y.map, k)) {
        blocked = true;
        break;
      }
    }
    if (blocked) continue;
    auto m = build_map(exc.psi, x.map, ValueMap{}, k);
    if (!m.has_value()) continue;
    set_add(out, Interval(exc.lhs, x.start, x.end, *m));
  }
  return out;
}

// Direct transcription of the three minimality clauses, quadratic.
inline Set minimal_filter(const Set& fresh, const Set& pool) {
  Set out;
  for (const Interval& c : fresh) {
    bool drop = false;
    for (const Interval& p : pool) {
      if (p.id == c.id && c.start <= p.start && p.end <= c.end) drop = true;
    }
    for (const Interval& f : fresh) {
      if (f.id != c.id) continue;
      if ((c.start <= f.start && f.end < c.end) || (c.start < f.start && f.end <= c.end)) {
        drop = true;
      }
      if (f.start == c.start && f.end == c.end && nfer::map_order(f.map, c.map) < 0) drop = true;
    }
    if (!drop) set_add(out, c);
  }
  return out;
}

inline Set one_pass(const nfer::Spec& spec, Set pool, const Modulus& k, bool minimal,
                    const std::vector<std::size_t>& order) {
  for (std::size_t idx : order) {
    Set fresh = rule_step(spec.rules[idx], pool, k);
    if (minimal) fresh = minimal_filter(fresh, pool);
    for (const Interval& iv : fresh) set_add(pool, iv);
  }
  return pool;
}

// Smallest-index-first topological order by repeated scans; same selection
// convention as the library, different algorithm.
inline std::optional<std::vector<std::size_t>> topo(const nfer::Spec& spec) {
  std::size_t n = spec.rules.size();
  std::vector<bool> done(n, false);
  std::vector<std::size_t> order;
  while (order.size() < n) {
    bool progress = false;
    for (std::size_t i = 0; i < n && !progress; ++i) {
      if (done[i]) continue;
      std::vector<Identifier> reads = nfer::rhs_of(spec.rules[i]);
      bool ready = true;
      for (std::size_t j = 0; j < n; ++j) {
        if (done[j]) continue;
        const Identifier& produced = nfer::lhs_of(spec.rules[j]);
        if (std::find(reads.begin(), reads.end(), produced) != reads.end()) ready = false;
      }
      if (ready) {
        done[i] = true;
        order.push_back(i);
        progress = true;
      }
    }
    if (!progress) return std::nullopt;
  }
  return order;
}

struct FixpointResult {
  Set pool;
  bool saturated = false;
  std::uint64_t iterations = 0;
};

inline Set initial_pool(const Trace& trace, const Modulus& k) {
  Set pool;
  for (const nfer::Event& e : trace.events) {
    ValueMap m;
    for (const auto& [key, v] : e.map.entries()) {
      if (nfer::is_nat(v)) {
        m.set(key, Value(mod_reduce(nfer::as_nat(v), k)));
      } else {
        m.set(key, v);
      }
    }
    set_add(pool, Interval(e.id, e.time, e.time, m));
  }
  return pool;
}

inline FixpointResult fixpoint(const nfer::Spec& spec, const Trace& trace, const Modulus& k,
                               bool minimal, std::uint64_t max_iterations) {
  Set pool = initial_pool(trace, k);
  if (auto order = topo(spec)) {
    return FixpointResult{one_pass(spec, std::move(pool), k, minimal, *order), true, 1};
  }
  std::vector<std::size_t> order(spec.rules.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::uint64_t it = 1; it <= max_iterations; ++it) {
    Set next = one_pass(spec, pool, k, minimal, order);
    if (next.size() == pool.size()) return FixpointResult{std::move(next), true, it};
    pool = std::move(next);
  }
  return FixpointResult{std::move(pool), false, max_iterations};
}

inline bool pool_matches(const nfer::Pool& pool, const Set& set) {
  if (pool.size() != set.size()) return false;
  for (const Interval& iv : set) {
    if (!pool.contains(iv)) return false;
  }
  return true;
}

}  // namespace oracle
