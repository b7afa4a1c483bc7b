// Map expressions: predicates and update right-hand sides over two operand
// maps, with infinite or modular natural arithmetic.
#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "nfer/core.hpp"

namespace nfer {

// Arithmetic domain. Infinite uses truncated subtraction; Modulo(k) keeps
// every natural result in [0, k).
class ArithMode {
 public:
  static ArithMode infinite() { return ArithMode(std::nullopt); }
  static ArithMode modulo(Nat k) {
    if (k < 1) throw std::invalid_argument("modulus must be at least 1");
    return ArithMode(std::move(k));
  }

  bool finite() const { return bound_.has_value(); }
  const Nat& bound() const { return *bound_; }

  Nat reduce(Nat v) const {
    if (bound_) v %= *bound_;
    return v;
  }

  friend bool operator==(const ArithMode& a, const ArithMode& b) { return a.bound_ == b.bound_; }

 private:
  explicit ArithMode(std::optional<Nat> bound) : bound_(std::move(bound)) {}
  std::optional<Nat> bound_;
};

enum class BinaryOp { add, sub, mul, div, mod, lt, le, gt, ge, eq, logical_and, logical_or };
enum class OperandSide { left, right };

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct NatLiteral { Nat value; };
struct BoolLiteral { bool value; };
struct FieldRef {
  OperandSide side;
  Identifier key;
};
struct BinaryExpr {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct NotExpr { ExprPtr operand; };

class Expr {
 public:
  using Node = std::variant<NatLiteral, BoolLiteral, FieldRef, BinaryExpr, NotExpr>;

  explicit Expr(Node node) : node_(std::move(node)) {}
  const Node& node() const { return node_; }

  static ExprPtr nat(Nat v) {
    if (v < 0) throw std::invalid_argument("literal must be nonnegative");
    return std::make_shared<Expr>(NatLiteral{std::move(v)});
  }
  static ExprPtr boolean(bool v) { return std::make_shared<Expr>(BoolLiteral{v}); }
  static ExprPtr field(OperandSide side, Identifier key) {
    return std::make_shared<Expr>(FieldRef{side, std::move(key)});
  }
  static ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    return std::make_shared<Expr>(BinaryExpr{op, std::move(lhs), std::move(rhs)});
  }
  static ExprPtr negation(ExprPtr operand) {
    return std::make_shared<Expr>(NotExpr{std::move(operand)});
  }

 private:
  Node node_;
};

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  const auto& na = a->node();
  const auto& nb = b->node();
  if (na.index() != nb.index()) return false;
  if (const auto* la = std::get_if<NatLiteral>(&na)) {
    return la->value == std::get<NatLiteral>(nb).value;
  }
  if (const auto* ba = std::get_if<BoolLiteral>(&na)) {
    return ba->value == std::get<BoolLiteral>(nb).value;
  }
  if (const auto* fa = std::get_if<FieldRef>(&na)) {
    const auto& fb = std::get<FieldRef>(nb);
    return fa->side == fb.side && fa->key == fb.key;
  }
  if (const auto* xa = std::get_if<BinaryExpr>(&na)) {
    const auto& xb = std::get<BinaryExpr>(nb);
    return xa->op == xb.op && expr_equal(xa->lhs, xb.lhs) && expr_equal(xa->rhs, xb.rhs);
  }
  return expr_equal(std::get<NotExpr>(na).operand, std::get<NotExpr>(nb).operand);
}

// Soft failure: absent keys, kind mismatches, division or modulus by zero.
// Failures are values of this evaluator, not exceptions.
using EvalValue = std::optional<Value>;

namespace detail {

inline EvalValue eval_binary(BinaryOp op, const Value& a, const Value& b, const ArithMode& mode) {
  switch (op) {
    case BinaryOp::add:
    case BinaryOp::sub:
    case BinaryOp::mul:
    case BinaryOp::div:
    case BinaryOp::mod: {
      if (!is_nat(a) || !is_nat(b)) return std::nullopt;
      const Nat& x = as_nat(a);
      const Nat& y = as_nat(b);
      switch (op) {
        case BinaryOp::add:
          return Value(mode.reduce(x + y));
        case BinaryOp::sub:
          if (mode.finite()) {
            return Value(mode.reduce(mode.reduce(x) + mode.bound() - mode.reduce(y)));
          }
          return Value(x < y ? Nat(0) : Nat(x - y));
        case BinaryOp::mul:
          return Value(mode.reduce(x * y));
        case BinaryOp::div:
          if (y == 0) return std::nullopt;
          return Value(mode.reduce(x / y));
        case BinaryOp::mod:
          if (y == 0) return std::nullopt;
          return Value(mode.reduce(x % y));
        default:
          return std::nullopt;
      }
    }
    case BinaryOp::lt:
    case BinaryOp::le:
    case BinaryOp::gt:
    case BinaryOp::ge: {
      // Ordering is defined on naturals only.
      if (!is_nat(a) || !is_nat(b)) return std::nullopt;
      const Nat& x = as_nat(a);
      const Nat& y = as_nat(b);
      switch (op) {
        case BinaryOp::lt: return Value(x < y);
        case BinaryOp::le: return Value(x <= y);
        case BinaryOp::gt: return Value(x > y);
        default: return Value(x >= y);
      }
    }
    case BinaryOp::eq:
      if (is_nat(a) != is_nat(b)) return std::nullopt;
      return Value(a == b);
    case BinaryOp::logical_and:
    case BinaryOp::logical_or: {
      if (!is_bool(a) || !is_bool(b)) return std::nullopt;
      bool x = as_bool(a);
      bool y = as_bool(b);
      return Value(op == BinaryOp::logical_and ? (x && y) : (x || y));
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Strict evaluation: both operands of a connective are evaluated and any
// soft failure propagates. In Modulo(k) every natural that the evaluator
// returns lies in [0, k), including field reads from unreduced maps.
inline EvalValue evaluate(const ExprPtr& expr, const ValueMap& left, const ValueMap& right,
                          const ArithMode& mode) {
  const auto& node = expr->node();
  if (const auto* lit = std::get_if<NatLiteral>(&node)) {
    return Value(mode.reduce(lit->value));
  }
  if (const auto* lit = std::get_if<BoolLiteral>(&node)) {
    return Value(lit->value);
  }
  if (const auto* field = std::get_if<FieldRef>(&node)) {
    const ValueMap& m = field->side == OperandSide::left ? left : right;
    const Value* v = m.find(field->key);
    if (!v) return std::nullopt;
    if (is_nat(*v)) return Value(mode.reduce(as_nat(*v)));
    return *v;
  }
  if (const auto* bin = std::get_if<BinaryExpr>(&node)) {
    EvalValue a = evaluate(bin->lhs, left, right, mode);
    EvalValue b = evaluate(bin->rhs, left, right, mode);
    if (!a || !b) return std::nullopt;
    return detail::eval_binary(bin->op, *a, *b, mode);
  }
  const auto& neg = std::get<NotExpr>(node);
  EvalValue v = evaluate(neg.operand, left, right, mode);
  if (!v || !is_bool(*v)) return std::nullopt;
  return Value(!as_bool(*v));
}

// Rule predicate; holds iff the body evaluates to true. Failures and
// naturals count as false.
struct MapPredicate {
  ExprPtr body;

  static MapPredicate always() { return MapPredicate{Expr::boolean(true)}; }
};

inline bool apply_predicate(const MapPredicate& pred, const ValueMap& left, const ValueMap& right,
                            const ArithMode& mode) {
  EvalValue v = evaluate(pred.body, left, right, mode);
  return v && is_bool(*v) && as_bool(*v);
}

struct MapAssignment {
  Identifier key;
  ExprPtr value;
};

// Result-map builder. Keys are distinct; any failing right-hand side makes
// the whole update fail.
struct MapUpdate {
  std::vector<MapAssignment> assignments;
};

inline std::optional<ValueMap> apply_update(const MapUpdate& update, const ValueMap& left,
                                            const ValueMap& right, const ArithMode& mode) {
  ValueMap out;
  for (const MapAssignment& a : update.assignments) {
    EvalValue v = evaluate(a.value, left, right, mode);
    if (!v) return std::nullopt;
    out.set(a.key, std::move(*v));
  }
  return out;
}

inline bool update_equal(const MapUpdate& a, const MapUpdate& b) {
  if (a.assignments.size() != b.assignments.size()) return false;
  for (std::size_t i = 0; i < a.assignments.size(); ++i) {
    if (a.assignments[i].key != b.assignments[i].key) return false;
    if (!expr_equal(a.assignments[i].value, b.assignments[i].value)) return false;
  }
  return true;
}

}  // namespace nfer
