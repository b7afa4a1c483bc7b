// Rule semantics: temporal operators over interval pairs, inclusive and
// exclusive productions, and the minimality filter.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "nfer/core.hpp"
#include "nfer/expr.hpp"

namespace nfer {

enum class InclusiveOp { before, meet, during, coincide, start, finish, overlap, slice };
enum class ExclusiveOp { after, follow, contain };

inline const char* op_text(InclusiveOp op) {
  switch (op) {
    case InclusiveOp::before: return "before";
    case InclusiveOp::meet: return "meet";
    case InclusiveOp::during: return "during";
    case InclusiveOp::coincide: return "coincide";
    case InclusiveOp::start: return "start";
    case InclusiveOp::finish: return "finish";
    case InclusiveOp::overlap: return "overlap";
    case InclusiveOp::slice: return "slice";
  }
  return "?";
}

inline const char* op_text(ExclusiveOp op) {
  switch (op) {
    case ExclusiveOp::after: return "after";
    case ExclusiveOp::follow: return "follow";
    case ExclusiveOp::contain: return "contain";
  }
  return "?";
}

struct MatchWindow {
  Nat start;
  Nat end;
};

// Relation test and result window for an inclusive operator, first operand
// (s1, e1) against second (s2, e2).
inline std::optional<MatchWindow> inclusive_match(InclusiveOp op, const Interval& i1,
                                                  const Interval& i2) {
  const Nat& s1 = i1.start;
  const Nat& e1 = i1.end;
  const Nat& s2 = i2.start;
  const Nat& e2 = i2.end;
  switch (op) {
    case InclusiveOp::before:
      if (e1 < s2) return MatchWindow{s1, e2};
      return std::nullopt;
    case InclusiveOp::meet:
      if (e1 == s2) return MatchWindow{s1, e2};
      return std::nullopt;
    case InclusiveOp::during:
      if (s2 <= s1 && e1 <= e2) return MatchWindow{s2, e2};
      return std::nullopt;
    case InclusiveOp::coincide:
      if (s1 == s2 && e1 == e2) return MatchWindow{s1, e1};
      return std::nullopt;
    case InclusiveOp::start:
      if (s1 == s2) return MatchWindow{s1, std::max(e1, e2)};
      return std::nullopt;
    case InclusiveOp::finish:
      if (e1 == e2) return MatchWindow{std::min(s1, s2), e1};
      return std::nullopt;
    case InclusiveOp::overlap:
      if (s1 < e2 && s2 < e1) return MatchWindow{std::min(s1, s2), std::max(e1, e2)};
      return std::nullopt;
    case InclusiveOp::slice:
      if (s1 < e2 && s2 < e1) return MatchWindow{std::max(s1, s2), std::min(e1, e2)};
      return std::nullopt;
  }
  return std::nullopt;
}

// Exclusion test for an exclusive operator: does i2 block i1.
inline bool exclusive_match(ExclusiveOp op, const Interval& i1, const Interval& i2) {
  switch (op) {
    case ExclusiveOp::after: return i1.start > i2.end;
    case ExclusiveOp::follow: return i2.end == i1.start;
    case ExclusiveOp::contain: return i1.start <= i2.start && i2.end <= i1.end;
  }
  return false;
}

struct InclusiveRule {
  Identifier lhs;
  Identifier left;
  InclusiveOp op;
  Identifier right;
  MapPredicate phi;
  MapUpdate psi;
};

struct ExclusiveRule {
  Identifier lhs;
  Identifier included;
  ExclusiveOp op;
  Identifier excluded;
  MapPredicate phi;
  MapUpdate psi;
};

using Rule = std::variant<InclusiveRule, ExclusiveRule>;

inline bool is_exclusive(const Rule& rule) { return std::holds_alternative<ExclusiveRule>(rule); }

inline const Identifier& lhs_of(const Rule& rule) {
  if (const auto* inc = std::get_if<InclusiveRule>(&rule)) return inc->lhs;
  return std::get<ExclusiveRule>(rule).lhs;
}

// Identifiers the rule reads: both operands, or included plus excluded.
inline std::vector<Identifier> rhs_of(const Rule& rule) {
  if (const auto* inc = std::get_if<InclusiveRule>(&rule)) return {inc->left, inc->right};
  const auto& exc = std::get<ExclusiveRule>(rule);
  return {exc.included, exc.excluded};
}

inline bool rule_equal(const Rule& a, const Rule& b) {
  if (a.index() != b.index()) return false;
  if (const auto* ia = std::get_if<InclusiveRule>(&a)) {
    const auto& ib = std::get<InclusiveRule>(b);
    return ia->lhs == ib.lhs && ia->left == ib.left && ia->op == ib.op && ia->right == ib.right &&
           expr_equal(ia->phi.body, ib.phi.body) && update_equal(ia->psi, ib.psi);
  }
  const auto& ea = std::get<ExclusiveRule>(a);
  const auto& eb = std::get<ExclusiveRule>(b);
  return ea.lhs == eb.lhs && ea.included == eb.included && ea.op == eb.op &&
         ea.excluded == eb.excluded && expr_equal(ea.phi.body, eb.phi.body) &&
         update_equal(ea.psi, eb.psi);
}

// Pool indices grouped by label, in pool insertion order.
using IdIndex = std::unordered_map<Identifier, std::vector<std::size_t>, IdentifierHash>;

inline IdIndex index_by_id(const Pool& pool) {
  IdIndex index;
  const auto& items = pool.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    index[items[i].id].push_back(i);
  }
  return index;
}

namespace detail {

inline const std::vector<std::size_t>* find_group(const IdIndex& index, const Identifier& id) {
  auto it = index.find(id);
  if (it == index.end() || it->second.empty()) return nullptr;
  return &it->second;
}

// Enumerates matching (i1, i2) pairs for an inclusive rule. Join strategy
// depends on the operator; enumeration order is deterministic. The same
// interval may serve as both operands.
template <typename Fn>
void for_each_inclusive_pair(const InclusiveRule& rule, const Pool& pool, const IdIndex& index,
                             Fn&& fn) {
  const auto* lg = find_group(index, rule.left);
  const auto* rg = find_group(index, rule.right);
  if (!lg || !rg) return;
  const auto& items = pool.items();

  auto emit = [&](std::size_t a, std::size_t b) {
    auto window = inclusive_match(rule.op, items[a], items[b]);
    if (window) fn(a, b, *window);
  };

  switch (rule.op) {
    case InclusiveOp::meet:
    case InclusiveOp::start: {
      // Hash join on the second operand's start.
      std::unordered_map<std::size_t, std::vector<std::size_t>> by_start;
      for (std::size_t b : *rg) by_start[nat_hash(items[b].start)].push_back(b);
      for (std::size_t a : *lg) {
        const Nat& key = rule.op == InclusiveOp::meet ? items[a].end : items[a].start;
        auto it = by_start.find(nat_hash(key));
        if (it == by_start.end()) continue;
        for (std::size_t b : it->second) emit(a, b);
      }
      break;
    }
    case InclusiveOp::finish: {
      std::unordered_map<std::size_t, std::vector<std::size_t>> by_end;
      for (std::size_t b : *rg) by_end[nat_hash(items[b].end)].push_back(b);
      for (std::size_t a : *lg) {
        auto it = by_end.find(nat_hash(items[a].end));
        if (it == by_end.end()) continue;
        for (std::size_t b : it->second) emit(a, b);
      }
      break;
    }
    case InclusiveOp::coincide: {
      std::unordered_map<std::size_t, std::vector<std::size_t>> by_span;
      for (std::size_t b : *rg) {
        by_span[hash_combine(nat_hash(items[b].start), nat_hash(items[b].end))].push_back(b);
      }
      for (std::size_t a : *lg) {
        auto it = by_span.find(hash_combine(nat_hash(items[a].start), nat_hash(items[a].end)));
        if (it == by_span.end()) continue;
        for (std::size_t b : it->second) emit(a, b);
      }
      break;
    }
    case InclusiveOp::before: {
      // Second operands sorted by start; binary search per first operand.
      std::vector<std::size_t> sorted = *rg;
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t x, std::size_t y) {
        return items[x].start < items[y].start;
      });
      for (std::size_t a : *lg) {
        auto it = std::upper_bound(sorted.begin(), sorted.end(), items[a].end,
                                   [&](const Nat& e, std::size_t b) { return e < items[b].start; });
        for (; it != sorted.end(); ++it) emit(a, *it);
      }
      break;
    }
    case InclusiveOp::during:
    case InclusiveOp::overlap:
    case InclusiveOp::slice: {
      for (std::size_t a : *lg) {
        for (std::size_t b : *rg) emit(a, b);
      }
      break;
    }
  }
}

// Enumerates unblocked first operands for an exclusive rule.
template <typename Fn>
void for_each_exclusive_survivor(const ExclusiveRule& rule, const Pool& pool, const IdIndex& index,
                                 const ArithMode& mode, Fn&& fn) {
  const auto* ig = find_group(index, rule.included);
  if (!ig) return;
  const auto* eg = find_group(index, rule.excluded);
  const auto& items = pool.items();
  for (std::size_t a : *ig) {
    bool blocked = false;
    if (eg) {
      for (std::size_t b : *eg) {
        if (exclusive_match(rule.op, items[a], items[b]) &&
            apply_predicate(rule.phi, items[a].map, items[b].map, mode)) {
          blocked = true;
          break;
        }
      }
    }
    if (!blocked) fn(a);
  }
}

// Full candidate production for one rule. fn receives the produced interval
// and its parents' pool indices (second parent absent for exclusive rules).
template <typename Fn>
void for_each_production(const Rule& rule, const Pool& pool, const IdIndex& index,
                         const ArithMode& mode, Fn&& fn) {
  const auto& items = pool.items();
  if (const auto* inc = std::get_if<InclusiveRule>(&rule)) {
    for_each_inclusive_pair(*inc, pool, index, [&](std::size_t a, std::size_t b,
                                                   const MatchWindow& window) {
      if (!apply_predicate(inc->phi, items[a].map, items[b].map, mode)) return;
      auto map = apply_update(inc->psi, items[a].map, items[b].map, mode);
      if (!map) return;
      fn(Interval(inc->lhs, window.start, window.end, std::move(*map)), a,
         std::optional<std::size_t>(b));
    });
  } else {
    const auto& exc = std::get<ExclusiveRule>(rule);
    for_each_exclusive_survivor(exc, pool, index, mode, [&](std::size_t a) {
      auto map = apply_update(exc.psi, items[a].map, ValueMap{}, mode);
      if (!map) return;
      fn(Interval(exc.lhs, items[a].start, items[a].end, std::move(*map)), a,
         std::optional<std::size_t>());
    });
  }
}

}  // namespace detail

// One inclusive rule applied to a pool: all windows whose predicate holds
// and whose update succeeds.
inline Pool apply_inclusive(const InclusiveRule& rule, const Pool& pool, const ArithMode& mode) {
  Pool out;
  IdIndex index = index_by_id(pool);
  detail::for_each_production(Rule(rule), pool, index, mode,
                              [&](Interval&& iv, std::size_t, std::optional<std::size_t>) {
                                out.insert(std::move(iv));
                              });
  return out;
}

// One exclusive rule applied to a pool: every included interval with no
// matching excluder, timestamps copied, map built against an empty second
// operand.
inline Pool apply_exclusive(const ExclusiveRule& rule, const Pool& pool, const ArithMode& mode) {
  Pool out;
  IdIndex index = index_by_id(pool);
  detail::for_each_production(Rule(rule), pool, index, mode,
                              [&](Interval&& iv, std::size_t, std::optional<std::size_t>) {
                                out.insert(std::move(iv));
                              });
  return out;
}

namespace detail {

// Spans of existing same-label intervals, prepared for the containment
// test of minimality clause one.
struct SpanIndex {
  // Sorted by start; min_end_from[i] is the least end among spans[i..].
  std::vector<std::pair<Nat, Nat>> spans;
  std::vector<Nat> min_end_from;

  static SpanIndex build(std::vector<std::pair<Nat, Nat>> spans_in) {
    SpanIndex idx;
    idx.spans = std::move(spans_in);
    std::sort(idx.spans.begin(), idx.spans.end());
    idx.min_end_from.resize(idx.spans.size());
    for (std::size_t i = idx.spans.size(); i-- > 0;) {
      idx.min_end_from[i] = idx.spans[i].second;
      if (i + 1 < idx.spans.size() && idx.min_end_from[i + 1] < idx.min_end_from[i]) {
        idx.min_end_from[i] = idx.min_end_from[i + 1];
      }
    }
    return idx;
  }

  // True iff some span (s1, e1) satisfies s <= s1 and e1 <= e.
  bool contains_within(const Nat& s, const Nat& e) const {
    auto it = std::lower_bound(spans.begin(), spans.end(), s,
                               [](const std::pair<Nat, Nat>& sp, const Nat& v) {
                                 return sp.first < v;
                               });
    std::size_t i = std::size_t(it - spans.begin());
    return i < spans.size() && min_end_from[i] <= e;
  }
};

}  // namespace detail

/// Minimality filter. A candidate (n, s, e, M) from fresh survives iff
///  1. no interval labeled n in existing has its span inside [s, e],
///  2. no candidate labeled n in fresh has its span strictly inside [s, e]
///     (inside and shorter on at least one side), and
///  3. M is the least map among fresh candidates sharing (n, s, e).
/// Clauses are an intersection over the whole inputs, not sequential.
inline Pool minimality(const Pool& fresh, const Pool& existing) {
  if (fresh.empty()) return Pool{};

  // Group candidate indices by label.
  std::unordered_map<Identifier, std::vector<std::size_t>, IdentifierHash> groups;
  const auto& items = fresh.items();
  for (std::size_t i = 0; i < items.size(); ++i) groups[items[i].id].push_back(i);

  IdIndex existing_index = index_by_id(existing);

  std::vector<bool> keep(items.size(), false);
  for (auto& [id, candidates] : groups) {
    detail::SpanIndex pool_spans = [&] {
      std::vector<std::pair<Nat, Nat>> spans;
      if (const auto* group = detail::find_group(existing_index, id)) {
        for (std::size_t i : *group) {
          spans.emplace_back(existing.items()[i].start, existing.items()[i].end);
        }
      }
      return detail::SpanIndex::build(std::move(spans));
    }();

    // Distinct candidate spans, each mapped to strict-containment dominance
    // by a sweep in decreasing start order.
    std::vector<std::pair<Nat, Nat>> spans;
    spans.reserve(candidates.size());
    for (std::size_t i : candidates) spans.emplace_back(items[i].start, items[i].end);
    std::sort(spans.begin(), spans.end());
    spans.erase(std::unique(spans.begin(), spans.end()), spans.end());

    std::map<std::pair<Nat, Nat>, bool> dominated;
    std::optional<Nat> min_end_right;  // least end among spans with larger start
    std::size_t hi = spans.size();
    while (hi > 0) {
      std::size_t lo = hi;
      while (lo > 0 && spans[lo - 1].first == spans[hi - 1].first) --lo;
      const Nat& group_min_end = spans[lo].second;  // least end at this start
      for (std::size_t i = lo; i < hi; ++i) {
        bool dom = i > lo;  // a shorter span shares this start
        if (!dom && min_end_right && *min_end_right <= spans[i].second) dom = true;
        dominated[spans[i]] = dom;
      }
      if (!min_end_right || group_min_end < *min_end_right) min_end_right = group_min_end;
      hi = lo;
    }

    // Least map per distinct (s, e).
    std::map<std::pair<Nat, Nat>, std::size_t> least;
    for (std::size_t i : candidates) {
      auto key = std::make_pair(items[i].start, items[i].end);
      auto [it, fresh_key] = least.try_emplace(key, i);
      if (!fresh_key && map_order(items[i].map, items[it->second].map) < 0) it->second = i;
    }

    for (std::size_t i : candidates) {
      const Interval& iv = items[i];
      if (pool_spans.contains_within(iv.start, iv.end)) continue;
      if (dominated.at({iv.start, iv.end})) continue;
      if (least.at({iv.start, iv.end}) != i) continue;
      keep[i] = true;
    }
  }

  Pool out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (keep[i]) out.insert(items[i]);
  }
  return out;
}

}  // namespace nfer
