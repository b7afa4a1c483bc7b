#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "gen.hpp"
#include "naive.hpp"
#include "nfer/analysis.hpp"
#include "nfer/expr.hpp"

using namespace nfer;

namespace {

ValueMap make_map(std::initializer_list<std::pair<const char*, Value>> entries) {
  ValueMap m;
  for (const auto& [k, v] : entries) m.set(Identifier(k), v);
  return m;
}

ExprPtr fld(OperandSide side, const char* key) { return Expr::field(side, Identifier(key)); }

EvalValue eval_inf(const ExprPtr& e, const ValueMap& a, const ValueMap& b) {
  return evaluate(e, a, b, ArithMode::infinite());
}

}  // namespace

TEST_CASE("arithmetic over infinite data") {
  ValueMap a = make_map({{"d", Value(Nat(256))}});
  auto sq = Expr::binary(BinaryOp::mul, fld(OperandSide::left, "d"), fld(OperandSide::left, "d"));
  auto v = eval_inf(sq, a, ValueMap{});
  REQUIRE(v.has_value());
  CHECK(as_nat(*v) == 65536);

  auto sub = Expr::binary(BinaryOp::sub, Expr::nat(Nat(3)), Expr::nat(Nat(5)));
  v = eval_inf(sub, ValueMap{}, ValueMap{});
  REQUIRE(v.has_value());
  CHECK(as_nat(*v) == 0);  // truncated at zero

  auto dv = Expr::binary(BinaryOp::div, Expr::nat(Nat(7)), Expr::nat(Nat(2)));
  v = eval_inf(dv, ValueMap{}, ValueMap{});
  REQUIRE(v.has_value());
  CHECK(as_nat(*v) == 3);
}

TEST_CASE("soft failures: absent keys, kind mismatches, zero divisors") {
  ValueMap a = make_map({{"d", Value(Nat(1))}, {"f", Value(true)}});
  ValueMap b;
  CHECK_FALSE(eval_inf(fld(OperandSide::right, "d"), a, b).has_value());

  auto bad_add = Expr::binary(BinaryOp::add, fld(OperandSide::left, "f"), Expr::nat(Nat(1)));
  CHECK_FALSE(eval_inf(bad_add, a, b).has_value());

  auto bad_lt = Expr::binary(BinaryOp::lt, Expr::boolean(true), Expr::boolean(false));
  CHECK_FALSE(eval_inf(bad_lt, a, b).has_value());

  auto div0 = Expr::binary(BinaryOp::div, Expr::nat(Nat(4)), Expr::nat(Nat(0)));
  CHECK_FALSE(eval_inf(div0, a, b).has_value());
  auto mod0 = Expr::binary(BinaryOp::mod, Expr::nat(Nat(4)), Expr::nat(Nat(0)));
  CHECK_FALSE(eval_inf(mod0, a, b).has_value());

  // Equality across kinds fails rather than returning false.
  auto cross_eq = Expr::binary(BinaryOp::eq, Expr::nat(Nat(0)), Expr::boolean(false));
  CHECK_FALSE(eval_inf(cross_eq, a, b).has_value());

  auto and_nat = Expr::binary(BinaryOp::logical_and, Expr::boolean(true), Expr::nat(Nat(1)));
  CHECK_FALSE(eval_inf(and_nat, a, b).has_value());

  auto not_nat = Expr::negation(Expr::nat(Nat(1)));
  CHECK_FALSE(eval_inf(not_nat, a, b).has_value());
}

TEST_CASE("connectives do not short-circuit past a failure") {
  // false & <failure> fails rather than yielding false.
  auto fail = Expr::binary(BinaryOp::div, Expr::nat(Nat(1)), Expr::nat(Nat(0)));
  auto v = eval_inf(Expr::binary(BinaryOp::logical_and, Expr::boolean(false), fail), ValueMap{},
                    ValueMap{});
  CHECK_FALSE(v.has_value());
  v = eval_inf(Expr::binary(BinaryOp::logical_or, Expr::boolean(true), fail), ValueMap{},
               ValueMap{});
  CHECK_FALSE(v.has_value());
}

TEST_CASE("boolean equality and comparisons") {
  auto v = eval_inf(Expr::binary(BinaryOp::eq, Expr::boolean(true), Expr::boolean(false)),
                    ValueMap{}, ValueMap{});
  REQUIRE(v.has_value());
  CHECK(as_bool(*v) == false);
  v = eval_inf(Expr::binary(BinaryOp::ge, Expr::nat(Nat(3)), Expr::nat(Nat(3))), ValueMap{},
               ValueMap{});
  REQUIRE(v.has_value());
  CHECK(as_bool(*v) == true);
}

TEST_CASE("finite mode reduces literals, field reads, and results") {
  ArithMode m3 = ArithMode::modulo(Nat(3));
  auto v = evaluate(Expr::nat(Nat(7)), ValueMap{}, ValueMap{}, m3);
  REQUIRE(v.has_value());
  CHECK(as_nat(*v) == 1);

  ValueMap a = make_map({{"x", Value(Nat(7))}});
  v = evaluate(fld(OperandSide::left, "x"), a, ValueMap{}, m3);
  REQUIRE(v.has_value());
  CHECK(as_nat(*v) == 1);

  // Subtraction wraps: 3 - 4 = 4 under modulus 5.
  ArithMode m5 = ArithMode::modulo(Nat(5));
  v = evaluate(Expr::binary(BinaryOp::sub, Expr::nat(Nat(3)), Expr::nat(Nat(4))), ValueMap{},
               ValueMap{}, m5);
  REQUIRE(v.has_value());
  CHECK(as_nat(*v) == 4);

  // Modulus one collapses every natural to zero.
  ArithMode m1 = ArithMode::modulo(Nat(1));
  v = evaluate(Expr::binary(BinaryOp::add, Expr::nat(Nat(9)), Expr::nat(Nat(9))), ValueMap{},
               ValueMap{}, m1);
  REQUIRE(v.has_value());
  CHECK(as_nat(*v) == 0);

  CHECK_THROWS_AS(ArithMode::modulo(Nat(0)), std::invalid_argument);
}

TEST_CASE("finite mode results stay below the modulus") {
  std::mt19937 rng(42);
  ArithMode m4 = ArithMode::modulo(Nat(4));
  ValueMap a = make_map({{"x", Value(Nat(7))}, {"y", Value(true)}});
  ValueMap b = make_map({{"x", Value(Nat(2))}});
  for (int i = 0; i < 500; ++i) {
    ExprPtr e = testgen::random_expr(rng, 3, 9, testgen::default_keys());
    auto v = evaluate(e, a, b, m4);
    if (v.has_value() && is_nat(*v)) CHECK(as_nat(*v) < 4);
  }
}

TEST_CASE("evaluation agrees with the reference evaluator on random expressions") {
  std::mt19937 rng(7);
  std::vector<ValueMap> maps = {
      ValueMap{},
      make_map({{"x", Value(Nat(3))}}),
      make_map({{"x", Value(Nat(0))}, {"y", Value(true)}}),
      make_map({{"x", Value(false)}, {"y", Value(Nat(5))}}),
  };
  std::vector<std::pair<ArithMode, oracle::Modulus>> modes = {
      {ArithMode::infinite(), std::nullopt},
      {ArithMode::modulo(Nat(2)), Nat(2)},
      {ArithMode::modulo(Nat(5)), Nat(5)},
  };
  for (int i = 0; i < 2000; ++i) {
    ExprPtr e = testgen::random_expr(rng, 3, 6, testgen::default_keys());
    const ValueMap& a = maps[i % maps.size()];
    const ValueMap& b = maps[(i / maps.size()) % maps.size()];
    for (const auto& [mode, k] : modes) {
      auto got = evaluate(e, a, b, mode);
      auto want = oracle::eval(e, a, b, k);
      CHECK(got == want);
    }
  }
}

TEST_CASE("value growth is bounded by repeated squaring of the input bound") {
  // With inputs at most B and n operator nodes, results stay within B^(2^n).
  std::mt19937 rng(99);
  const Nat B = 3;
  ValueMap a = make_map({{"x", Value(Nat(3))}, {"y", Value(Nat(2))}});
  for (int i = 0; i < 400; ++i) {
    ExprPtr e = testgen::random_expr(rng, 2, 3, testgen::default_keys());
    Nat n = nfer::detail::expr_operator_count(e);
    auto v = evaluate(e, a, a, ArithMode::infinite());
    if (!v.has_value() || !is_nat(*v)) continue;
    Nat limit = B;
    for (Nat i2 = 0; i2 < n; ++i2) limit *= limit;
    CHECK(as_nat(*v) <= limit);
  }
}

TEST_CASE("predicates coerce failures and naturals to false") {
  ValueMap a = make_map({{"x", Value(Nat(2))}});
  MapPredicate truthy{Expr::binary(BinaryOp::le, fld(OperandSide::left, "x"), Expr::nat(Nat(2)))};
  CHECK(apply_predicate(truthy, a, ValueMap{}, ArithMode::infinite()));
  MapPredicate missing{fld(OperandSide::right, "x")};
  CHECK_FALSE(apply_predicate(missing, a, ValueMap{}, ArithMode::infinite()));
  MapPredicate numeric{Expr::nat(Nat(1))};
  CHECK_FALSE(apply_predicate(numeric, a, ValueMap{}, ArithMode::infinite()));
  CHECK(apply_predicate(MapPredicate::always(), ValueMap{}, ValueMap{}, ArithMode::infinite()));
}

TEST_CASE("updates fail as a whole when any assignment fails") {
  ValueMap a = make_map({{"x", Value(Nat(4))}});
  MapUpdate ok;
  ok.assignments.push_back({Identifier("d"), fld(OperandSide::left, "x")});
  ok.assignments.push_back({Identifier("flag"), Expr::boolean(true)});
  auto m = apply_update(ok, a, ValueMap{}, ArithMode::infinite());
  REQUIRE(m.has_value());
  CHECK(as_nat(*m->find(Identifier("d"))) == 4);
  CHECK(as_bool(*m->find(Identifier("flag"))) == true);

  MapUpdate bad = ok;
  bad.assignments.push_back({Identifier("oops"), fld(OperandSide::right, "x")});
  CHECK_FALSE(apply_update(bad, a, ValueMap{}, ArithMode::infinite()).has_value());

  // Empty update always yields the empty map.
  auto empty = apply_update(MapUpdate{}, a, ValueMap{}, ArithMode::infinite());
  REQUIRE(empty.has_value());
  CHECK(empty->empty());
}

TEST_CASE("expr_equal distinguishes structure") {
  auto e1 = Expr::binary(BinaryOp::add, Expr::nat(Nat(1)), Expr::nat(Nat(2)));
  auto e2 = Expr::binary(BinaryOp::add, Expr::nat(Nat(1)), Expr::nat(Nat(2)));
  auto e3 = Expr::binary(BinaryOp::add, Expr::nat(Nat(2)), Expr::nat(Nat(1)));
  CHECK(expr_equal(e1, e2));
  CHECK_FALSE(expr_equal(e1, e3));
  CHECK_FALSE(expr_equal(fld(OperandSide::left, "x"), fld(OperandSide::right, "x")));
}
