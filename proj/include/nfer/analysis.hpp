// Static analysis of rule sets: dependency graph, fragment classification,
// validation, and the size measure.
#pragma once

#include <algorithm>
#include <optional>
#include <queue>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "nfer/core.hpp"
#include "nfer/expr.hpp"
#include "nfer/rules.hpp"

namespace nfer {

// Rule order is meaningful and preserved.
struct Spec {
  std::vector<Rule> rules;
};

inline bool spec_equal(const Spec& a, const Spec& b) {
  if (a.rules.size() != b.rules.size()) return false;
  for (std::size_t i = 0; i < a.rules.size(); ++i) {
    if (!rule_equal(a.rules[i], b.rules[i])) return false;
  }
  return true;
}

// Nodes are rule indices; an edge i -> j means rule j reads what rule i
// produces. Self loops are possible.
struct RuleGraph {
  std::size_t nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<std::size_t>> successors;
  std::vector<std::vector<std::size_t>> predecessors;
};

inline RuleGraph build_graph(const Spec& spec) {
  RuleGraph g;
  g.nodes = spec.rules.size();
  g.successors.resize(g.nodes);
  g.predecessors.resize(g.nodes);
  for (std::size_t j = 0; j < g.nodes; ++j) {
    std::vector<Identifier> reads = rhs_of(spec.rules[j]);
    for (std::size_t i = 0; i < g.nodes; ++i) {
      const Identifier& produced = lhs_of(spec.rules[i]);
      if (std::find(reads.begin(), reads.end(), produced) != reads.end()) {
        g.edges.emplace_back(i, j);
        g.successors[i].push_back(j);
        g.predecessors[j].push_back(i);
      }
    }
  }
  return g;
}

struct FragmentInfo {
  bool cycle_free = false;
  bool has_exclusive = false;
  // Present iff cycle_free: a valid evaluation order, lowest index first
  // among ready rules.
  std::optional<std::vector<std::size_t>> topo_order;
};

namespace detail {

// Kahn's algorithm with a min-heap so the produced order is deterministic.
inline std::optional<std::vector<std::size_t>> topological_order(const RuleGraph& g) {
  std::vector<std::size_t> indegree(g.nodes, 0);
  for (const auto& [i, j] : g.edges) {
    (void)i;
    ++indegree[j];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < g.nodes; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(g.nodes);
  while (!ready.empty()) {
    std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t j : g.successors[i]) {
      if (--indegree[j] == 0) ready.push(j);
    }
  }
  if (order.size() != g.nodes) return std::nullopt;
  return order;
}

// Some cycle in the graph, as a rule index sequence c0 -> c1 -> ... -> c0.
// Iterative depth-first search; the first back edge found wins.
inline std::vector<std::size_t> find_cycle(const RuleGraph& g) {
  enum class Mark { fresh, active, done };
  std::vector<Mark> mark(g.nodes, Mark::fresh);
  std::vector<std::size_t> path;

  struct Frame {
    std::size_t node;
    std::size_t next = 0;
  };
  for (std::size_t root = 0; root < g.nodes; ++root) {
    if (mark[root] != Mark::fresh) continue;
    std::vector<Frame> stack{{root}};
    mark[root] = Mark::active;
    path.push_back(root);
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next < g.successors[top.node].size()) {
        std::size_t next = g.successors[top.node][top.next++];
        if (mark[next] == Mark::active) {
          auto it = std::find(path.begin(), path.end(), next);
          return std::vector<std::size_t>(it, path.end());
        }
        if (mark[next] == Mark::fresh) {
          mark[next] = Mark::active;
          path.push_back(next);
          stack.push_back(Frame{next});
        }
      } else {
        mark[top.node] = Mark::done;
        path.pop_back();
        stack.pop_back();
      }
    }
  }
  return {};
}

}  // namespace detail

inline FragmentInfo classify(const Spec& spec) {
  FragmentInfo info;
  for (const Rule& r : spec.rules) {
    if (is_exclusive(r)) info.has_exclusive = true;
  }
  RuleGraph g = build_graph(spec);
  info.topo_order = detail::topological_order(g);
  info.cycle_free = info.topo_order.has_value();
  return info;
}

struct Rejection {
  std::string reason;
  std::vector<std::size_t> rule_indices;    // offending rules
  std::vector<std::size_t> cycle;           // witness when a cycle is involved
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(Rejection rejection)
      : std::runtime_error(rejection.reason), rejection_(std::move(rejection)) {}
  const Rejection& rejection() const { return rejection_; }

 private:
  Rejection rejection_;
};

// A rule set is usable unless an exclusive rule sits in a cyclic graph or
// an update binds the same key twice.
inline std::optional<Rejection> validate(const Spec& spec) {
  for (std::size_t i = 0; i < spec.rules.size(); ++i) {
    const MapUpdate& psi = is_exclusive(spec.rules[i])
                               ? std::get<ExclusiveRule>(spec.rules[i]).psi
                               : std::get<InclusiveRule>(spec.rules[i]).psi;
    std::unordered_set<std::string> keys;
    for (const MapAssignment& a : psi.assignments) {
      if (!keys.insert(a.key.name()).second) {
        Rejection rej;
        rej.reason = "duplicate key '" + a.key.name() + "' in map clause of rule " +
                     std::to_string(i);
        rej.rule_indices.push_back(i);
        return rej;
      }
    }
  }

  FragmentInfo info = classify(spec);
  if (!info.cycle_free && info.has_exclusive) {
    RuleGraph g = build_graph(spec);
    Rejection rej;
    rej.cycle = detail::find_cycle(g);
    for (std::size_t i = 0; i < spec.rules.size(); ++i) {
      if (is_exclusive(spec.rules[i])) rej.rule_indices.push_back(i);
    }
    std::string cycle_text;
    for (std::size_t i : rej.cycle) {
      cycle_text += std::to_string(i);
      cycle_text += " -> ";
    }
    if (!rej.cycle.empty()) cycle_text += std::to_string(rej.cycle.front());
    rej.reason = "exclusive rules are not allowed in a cyclic rule set (cycle: " + cycle_text + ")";
    return rej;
  }
  return std::nullopt;
}

namespace detail {

inline Nat expr_operator_count(const ExprPtr& e) {
  const auto& node = e->node();
  if (const auto* bin = std::get_if<BinaryExpr>(&node)) {
    return 1 + expr_operator_count(bin->lhs) + expr_operator_count(bin->rhs);
  }
  if (const auto* neg = std::get_if<NotExpr>(&node)) {
    return 1 + expr_operator_count(neg->operand);
  }
  return 0;
}

inline Nat expr_literal_bits(const ExprPtr& e) {
  const auto& node = e->node();
  if (const auto* lit = std::get_if<NatLiteral>(&node)) return bit_length(lit->value);
  if (std::get_if<BoolLiteral>(&node)) return 1;
  if (const auto* bin = std::get_if<BinaryExpr>(&node)) {
    return expr_literal_bits(bin->lhs) + expr_literal_bits(bin->rhs);
  }
  if (const auto* neg = std::get_if<NotExpr>(&node)) return expr_literal_bits(neg->operand);
  return 0;
}

inline Nat expr_size(const ExprPtr& e) { return expr_operator_count(e) + expr_literal_bits(e); }

}  // namespace detail

struct SizeMeasure {
  Nat spec_size;
  Nat trace_size;
};

// Rule cost: operators plus literal bit lengths across predicate and update.
// Trace cost: timestamp bits plus value bits per event, booleans one bit.
inline SizeMeasure size_measure(const Spec& spec, const Trace& trace) {
  SizeMeasure m{0, 0};
  for (const Rule& r : spec.rules) {
    const MapPredicate& phi = is_exclusive(r) ? std::get<ExclusiveRule>(r).phi
                                              : std::get<InclusiveRule>(r).phi;
    const MapUpdate& psi = is_exclusive(r) ? std::get<ExclusiveRule>(r).psi
                                           : std::get<InclusiveRule>(r).psi;
    m.spec_size += detail::expr_size(phi.body);
    for (const MapAssignment& a : psi.assignments) m.spec_size += detail::expr_size(a.value);
  }
  for (const Event& e : trace.events) {
    m.trace_size += bit_length(e.time);
    for (const auto& [k, v] : e.map.entries()) {
      (void)k;
      m.trace_size += is_bool(v) ? Nat(1) : bit_length(as_nat(v));
    }
  }
  return m;
}

}  // namespace nfer
