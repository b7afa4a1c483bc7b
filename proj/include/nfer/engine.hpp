// Fixed-point evaluation over pools, with provenance, early exit, and
// witness extraction and replay.
#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "nfer/analysis.hpp"
#include "nfer/core.hpp"
#include "nfer/expr.hpp"
#include "nfer/rules.hpp"

namespace nfer {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalConfig {
  ArithMode mode = ArithMode::infinite();
  bool minimal = false;
  // Upper bound on full passes over the rule set. Required for cyclic rule
  // sets over infinite data, where evaluation may diverge.
  std::optional<std::uint64_t> fuel;
  // When set, evaluation stops as soon as an interval with this label is
  // inserted; the pool is then a prefix of the full result.
  std::optional<Identifier> early_exit_target;
};

struct Provenance {
  std::size_t rule = 0;
  // Two parents for inclusive rules, one for exclusive rules.
  std::vector<Interval> parents;
  // Exclusive rules: the label for which no matching excluder existed.
  std::optional<Identifier> excluded;
};

using ProvenanceMap = std::unordered_map<Interval, Provenance, IntervalHash>;

struct EvalResult {
  Pool pool;
  std::uint64_t iterations = 0;
  // True only when the pool is known to be the full fixed point.
  bool saturated = false;
  // Provenance for every generated (non-initial) interval.
  ProvenanceMap provenance;
  std::vector<std::string> diagnostics;
};

// Derivation tree: leaves are trace intervals, internal nodes name the rule
// that produced them. An inclusive node whose operands were the same
// interval stores one child standing for both.
struct WitnessTree {
  Interval root;
  std::optional<std::size_t> rule;
  std::optional<Identifier> excluded;
  std::vector<WitnessTree> children;
};

inline std::size_t witness_size(const WitnessTree& t) {
  std::size_t n = 1;
  for (const WitnessTree& c : t.children) n += witness_size(c);
  return n;
}

// Edges on the longest root-to-leaf path; 0 for a leaf.
inline std::size_t witness_height(const WitnessTree& t) {
  std::size_t h = 0;
  for (const WitnessTree& c : t.children) h = std::max(h, witness_height(c) + 1);
  return h;
}

class Verdict {
 public:
  enum class Kind { found, not_found, unknown };

  static Verdict found(WitnessTree witness) { return Verdict(Kind::found, std::move(witness)); }
  static Verdict not_found() { return Verdict(Kind::not_found, std::nullopt); }
  static Verdict unknown() { return Verdict(Kind::unknown, std::nullopt); }

  Kind kind() const { return kind_; }
  const WitnessTree& witness() const { return *witness_; }

 private:
  Verdict(Kind kind, std::optional<WitnessTree> witness)
      : kind_(kind), witness_(std::move(witness)) {}
  Kind kind_;
  std::optional<WitnessTree> witness_;
};

inline ValueMap reduce_map(const ValueMap& m, const ArithMode& mode,
                           std::size_t* changed = nullptr) {
  if (!mode.finite()) return m;
  ValueMap out;
  for (const auto& [k, v] : m.entries()) {
    if (is_nat(v)) {
      Nat r = mode.reduce(as_nat(v));
      if (changed && r != as_nat(v)) ++*changed;
      out.set(k, Value(std::move(r)));
    } else {
      out.set(k, v);
    }
  }
  return out;
}

// Initial pool; under Modulo(k) the event maps are reduced first.
// Timestamps are never reduced.
inline Pool init_reduced(const Trace& trace, const ArithMode& mode,
                         std::size_t* reduced_count = nullptr) {
  Pool pool;
  for (const Event& e : trace.events) {
    pool.insert(Interval(e.id, e.time, e.time, reduce_map(e.map, mode, reduced_count)));
  }
  return pool;
}

namespace detail {

class Engine {
 public:
  Engine(const Spec& spec, const EvalConfig& cfg) : spec_(spec), cfg_(cfg) {}

  void seed_from_trace(const Trace& trace) {
    std::size_t reduced = 0;
    for (const Event& e : trace.events) {
      insert(Interval(e.id, e.time, e.time, reduce_map(e.map, cfg_.mode, &reduced)), std::nullopt);
    }
    if (reduced > 0) {
      diagnostics_.push_back("reduced " + std::to_string(reduced) + " map values modulo " +
                             cfg_.mode.bound().str() + " at init");
    }
  }

  void seed_from_pool(const Pool& pool) {
    for (const Interval& iv : pool.items()) insert(iv, std::nullopt);
  }

  // One pass over the rules in the given order. True when something was
  // inserted. Aborts once the early-exit target appears.
  bool pass(const std::vector<std::size_t>& order) {
    bool changed = false;
    for (std::size_t idx : order) {
      changed = apply_rule(idx) || changed;
      if (stopped_early_) break;
    }
    return changed;
  }

  bool stopped_early() const { return stopped_early_; }
  const Pool& pool() const { return pool_; }
  void note(std::string text) { diagnostics_.push_back(std::move(text)); }

  EvalResult finish(std::uint64_t iterations, bool saturated) && {
    EvalResult res;
    res.pool = std::move(pool_);
    res.iterations = iterations;
    res.saturated = saturated;
    res.provenance = std::move(provenance_);
    res.diagnostics = std::move(diagnostics_);
    return res;
  }

 private:
  // Candidates are collected fully before insertion so a rule never sees
  // its own products within one application.
  bool apply_rule(std::size_t idx) {
    const Rule& rule = spec_.rules[idx];
    Pool candidates;
    std::vector<Provenance> parents;  // aligned with candidates.items()
    for_each_production(rule, pool_, index_, cfg_.mode,
                        [&](Interval&& iv, std::size_t a, std::optional<std::size_t> b) {
                          if (candidates.contains(iv)) return;  // first producer wins
                          Provenance p;
                          p.rule = idx;
                          p.parents.push_back(pool_.items()[a]);
                          if (b) {
                            p.parents.push_back(pool_.items()[*b]);
                          } else {
                            p.excluded = std::get<ExclusiveRule>(rule).excluded;
                          }
                          candidates.insert(std::move(iv));
                          parents.push_back(std::move(p));
                        });

    std::optional<Pool> selected;
    if (cfg_.minimal) selected = minimality(candidates, pool_);

    bool changed = false;
    const auto& items = candidates.items();
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (selected && !selected->contains(items[i])) continue;
      changed = insert(items[i], parents[i]) || changed;
      if (stopped_early_) break;
    }
    return changed;
  }

  bool insert(Interval iv, std::optional<Provenance> prov) {
    if (pool_.contains(iv)) return false;
    index_[iv.id].push_back(pool_.size());
    if (prov) provenance_.emplace(iv, std::move(*prov));
    if (cfg_.early_exit_target && iv.id == *cfg_.early_exit_target) stopped_early_ = true;
    pool_.insert(std::move(iv));
    return true;
  }

  const Spec& spec_;
  const EvalConfig& cfg_;
  Pool pool_;
  IdIndex index_;
  ProvenanceMap provenance_;
  std::vector<std::string> diagnostics_;
  bool stopped_early_ = false;
};

// Shared driver. A forced order replaces the computed topological order in
// the single-pass case (cycle-free rule sets only).
inline EvalResult run(const Spec& spec, const Trace& trace, const EvalConfig& cfg,
                      const std::optional<std::vector<std::size_t>>& forced_order = std::nullopt) {
  if (auto rej = validate(spec)) throw ValidationError(*rej);
  FragmentInfo info = classify(spec);

  Engine eng(spec, cfg);
  eng.seed_from_trace(trace);

  std::uint64_t iterations = 0;
  bool saturated = false;
  if (eng.stopped_early()) {
    // Target present in the trace itself.
    iterations = 0;
    saturated = false;
  } else if (info.cycle_free && !forced_order) {
    eng.pass(*info.topo_order);
    iterations = 1;
    saturated = !eng.stopped_early();
  } else {
    // Iterate to stability. A forced order may not be topological, so even a
    // cycle-free rule set is run this way; it still saturates within a pass
    // per rule. Divergence is possible only for cyclic sets over infinite
    // data, which therefore demand fuel.
    if (!info.cycle_free && !cfg.mode.finite() && !cfg.fuel) {
      throw ConfigError("cyclic rule set over infinite data requires fuel");
    }
    std::vector<std::size_t> order;
    if (forced_order) {
      order = *forced_order;
    } else {
      order.resize(spec.rules.size());
      std::iota(order.begin(), order.end(), 0);
    }
    for (std::uint64_t i = 1;; ++i) {
      if (cfg.fuel && i > *cfg.fuel) {
        iterations = i - 1;
        saturated = false;
        eng.note("fuel exhausted after " + std::to_string(iterations) + " iterations");
        break;
      }
      bool changed = eng.pass(order);
      if (eng.stopped_early()) {
        iterations = i;
        saturated = false;
        break;
      }
      if (!changed) {
        iterations = i;
        saturated = true;
        break;
      }
    }
  }
  if (eng.stopped_early()) {
    eng.note("stopped early: interval labeled '" + cfg.early_exit_target->name() + "' found");
  }
  return std::move(eng).finish(iterations, saturated);
}

}  // namespace detail

// One union pass over the rules in their written order against the given
// pool. Minimality is applied per rule when configured. Early exit does not
// apply; the pass always completes.
inline Pool step(const Spec& spec, const Pool& pool, const EvalConfig& config) {
  if (auto rej = validate(spec)) throw ValidationError(*rej);
  EvalConfig cfg = config;
  cfg.early_exit_target.reset();
  detail::Engine eng(spec, cfg);
  eng.seed_from_pool(pool);
  std::vector<std::size_t> order(spec.rules.size());
  std::iota(order.begin(), order.end(), 0);
  eng.pass(order);
  return std::move(eng).finish(1, false).pool;
}

/// Evaluates a trace to its interval pool. Cycle-free rule sets take one
/// pass in topological order and always saturate; cyclic ones iterate until
/// stable or out of fuel. Throws ValidationError for unusable rule sets and
/// ConfigError when a cyclic rule set over infinite data has no fuel.
inline EvalResult evaluate_trace(const Spec& spec, const Trace& trace, const EvalConfig& config) {
  return detail::run(spec, trace, config);
}

inline WitnessTree extract_witness(const EvalResult& result, const Interval& interval);

/// Replays a witness tree against the rule set. Leaves must be initial
/// intervals; inclusive nodes must reproduce their root from their
/// children; exclusive nodes must have no matching excluder in the pool.
inline bool verify_witness(const WitnessTree& node, const Spec& spec, const ArithMode& mode,
                           const Pool& pool, const Pool& initial) {
  if (!node.rule) return node.children.empty() && initial.contains(node.root);
  if (*node.rule >= spec.rules.size()) return false;
  const Rule& rule = spec.rules[*node.rule];

  if (const auto* inc = std::get_if<InclusiveRule>(&rule)) {
    if (node.children.empty() || node.children.size() > 2) return false;
    const WitnessTree& c1 = node.children.front();
    const WitnessTree& c2 = node.children.back();  // same node when collapsed
    if (node.root.id != inc->lhs) return false;
    if (c1.root.id != inc->left || c2.root.id != inc->right) return false;
    auto window = inclusive_match(inc->op, c1.root, c2.root);
    if (!window || window->start != node.root.start || window->end != node.root.end) return false;
    if (!apply_predicate(inc->phi, c1.root.map, c2.root.map, mode)) return false;
    auto map = apply_update(inc->psi, c1.root.map, c2.root.map, mode);
    if (!map || *map != node.root.map) return false;
    for (const WitnessTree& c : node.children) {
      if (!verify_witness(c, spec, mode, pool, initial)) return false;
    }
    return true;
  }

  const auto& exc = std::get<ExclusiveRule>(rule);
  if (node.children.size() != 1) return false;
  const WitnessTree& c = node.children.front();
  if (node.root.id != exc.lhs || c.root.id != exc.included) return false;
  if (node.root.start != c.root.start || node.root.end != c.root.end) return false;
  auto map = apply_update(exc.psi, c.root.map, ValueMap{}, mode);
  if (!map || *map != node.root.map) return false;
  if (node.excluded && *node.excluded != exc.excluded) return false;
  for (const Interval& iv : pool.items()) {
    if (iv.id != exc.excluded) continue;
    if (exclusive_match(exc.op, c.root, iv) &&
        apply_predicate(exc.phi, c.root.map, iv.map, mode)) {
      return false;
    }
  }
  return verify_witness(c, spec, mode, pool, initial);
}

namespace detail {

inline WitnessTree build_witness(const Interval& iv, const ProvenanceMap& provenance,
                                 std::unordered_set<Interval, IntervalHash>& path) {
  WitnessTree node{iv, std::nullopt, std::nullopt, {}};
  auto it = provenance.find(iv);
  if (it == provenance.end()) return node;
  if (!path.insert(iv).second) {
    // Parents are always recorded before their products, so a repetition
    // would mean corrupted provenance.
    throw std::logic_error("provenance contains a path repetition");
  }
  const Provenance& p = it->second;
  node.rule = p.rule;
  node.excluded = p.excluded;
  if (p.parents.size() == 2 && p.parents[0] == p.parents[1]) {
    node.children.push_back(build_witness(p.parents[0], provenance, path));
  } else {
    for (const Interval& parent : p.parents) {
      node.children.push_back(build_witness(parent, provenance, path));
    }
  }
  path.erase(iv);
  return node;
}

}  // namespace detail

inline WitnessTree extract_witness(const EvalResult& result, const Interval& interval) {
  if (!result.pool.contains(interval)) {
    throw std::invalid_argument("interval is not in the result pool");
  }
  std::unordered_set<Interval, IntervalHash> path;
  return detail::build_witness(interval, result.provenance, path);
}

/// Decides whether evaluation produces a target-labeled interval. Found
/// verdicts carry a replayed witness tree; NotFound is only reported for
/// saturated runs, Unknown only for fuel exhaustion.
inline Verdict decide(const Spec& spec, const Trace& trace, const Identifier& target,
                      EvalConfig config) {
  config.early_exit_target = target;
  EvalResult result = detail::run(spec, trace, config);

  const Interval* hit = nullptr;
  for (const Interval& iv : result.pool.items()) {
    if (iv.id == target) {
      hit = &iv;
      break;
    }
  }
  if (hit) {
    WitnessTree tree = extract_witness(result, *hit);
    Pool initial = init_reduced(trace, config.mode);
    if (!verify_witness(tree, spec, config.mode, result.pool, initial)) {
      throw std::logic_error("witness replay failed");
    }
    return Verdict::found(std::move(tree));
  }
  if (result.saturated) return Verdict::not_found();
  return Verdict::unknown();
}

namespace detail {

// Evaluation with an explicit rule order for the single-pass case; meant
// for order-independence checks on cycle-free rule sets.
inline EvalResult evaluate_trace_ordered(const Spec& spec, const Trace& trace,
                                         const EvalConfig& config,
                                         const std::vector<std::size_t>& order) {
  return run(spec, trace, config, order);
}

}  // namespace detail

}  // namespace nfer
