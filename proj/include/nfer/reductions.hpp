// Hardness-instance generators: two-counter machines, quantified 3-CNF, and
// a repeated-squaring chain, each compiled to a rule set plus trace, with
// direct simulators to check against.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nfer/analysis.hpp"
#include "nfer/core.hpp"
#include "nfer/expr.hpp"
#include "nfer/rules.hpp"
#include "nfer/trace_io.hpp"

namespace nfer {

struct CompiledInstance {
  Spec spec;
  Trace trace;
  Identifier target;
  // Modulus for finite-data instances; absent means infinite data.
  std::optional<Nat> bound;
};

// ---------------------------------------------------------------------------
// Two-counter machines.

struct MinskyInstr {
  enum class Kind { inc, dec, ifzero, stop };
  Kind kind = Kind::stop;
  int counter = 0;         // 0 or 1
  std::size_t target = 0;  // ifzero only
};

// Lines are numbered from zero; the last line is the only stop.
struct MinskyProgram {
  std::vector<MinskyInstr> lines;
};

inline void check_minsky(const MinskyProgram& p) {
  if (p.lines.empty()) throw std::invalid_argument("program must have at least one line");
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    const MinskyInstr& ins = p.lines[i];
    bool last = i + 1 == p.lines.size();
    if (last != (ins.kind == MinskyInstr::Kind::stop)) {
      throw std::invalid_argument("stop must appear exactly once, at the last line");
    }
    if (ins.kind != MinskyInstr::Kind::stop && ins.counter != 0 && ins.counter != 1) {
      throw std::invalid_argument("counter must be 0 or 1");
    }
    if (ins.kind == MinskyInstr::Kind::ifzero && ins.target >= p.lines.size()) {
      throw std::invalid_argument("goto target out of range");
    }
  }
}

inline MinskyProgram parse_minsky(std::string_view text) {
  MinskyProgram p;
  std::size_t lineno = 0;
  std::istringstream stream{std::string(text)};
  std::string raw;
  while (std::getline(stream, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string head = raw.substr(0, raw.find('#'));
    std::istringstream words(head);
    std::vector<std::string> tok;
    std::string w;
    while (words >> w) tok.push_back(w);
    if (tok.empty()) continue;

    auto counter_of = [&](const std::string& s) -> int {
      if (s == "0") return 0;
      if (s == "1") return 1;
      throw ParseError(lineno, 0, "counter must be 0 or 1");
    };
    MinskyInstr ins;
    if (tok[0] == "inc" && tok.size() == 2) {
      ins.kind = MinskyInstr::Kind::inc;
      ins.counter = counter_of(tok[1]);
    } else if (tok[0] == "dec" && tok.size() == 2) {
      ins.kind = MinskyInstr::Kind::dec;
      ins.counter = counter_of(tok[1]);
    } else if (tok[0] == "ifzero" && tok.size() == 4 && tok[2] == "goto") {
      ins.kind = MinskyInstr::Kind::ifzero;
      ins.counter = counter_of(tok[1]);
      try {
        ins.target = std::stoul(tok[3]);
      } catch (const std::exception&) {
        throw ParseError(lineno, 0, "goto target must be a line number");
      }
    } else if (tok[0] == "stop" && tok.size() == 1) {
      ins.kind = MinskyInstr::Kind::stop;
    } else {
      throw ParseError(lineno, 0, "expected 'inc C', 'dec C', 'ifzero C goto L', or 'stop'");
    }
    p.lines.push_back(ins);
  }
  try {
    check_minsky(p);
  } catch (const std::invalid_argument& e) {
    throw ParseError(lineno, 0, e.what());
  }
  return p;
}

inline std::string format_minsky(const MinskyProgram& p) {
  std::string out;
  for (const MinskyInstr& ins : p.lines) {
    switch (ins.kind) {
      case MinskyInstr::Kind::inc:
        out += "inc " + std::to_string(ins.counter);
        break;
      case MinskyInstr::Kind::dec:
        out += "dec " + std::to_string(ins.counter);
        break;
      case MinskyInstr::Kind::ifzero:
        out += "ifzero " + std::to_string(ins.counter) + " goto " + std::to_string(ins.target);
        break;
      case MinskyInstr::Kind::stop:
        out += "stop";
        break;
    }
    out += '\n';
  }
  return out;
}

struct MinskyRun {
  bool halted = false;
  std::uint64_t steps = 0;  // transitions taken
  Nat c0, c1;
  std::size_t line = 0;
};

// Direct simulation. Decrement is truncated at zero; ifzero jumps on a zero
// counter and falls through otherwise.
inline MinskyRun simulate_minsky(const MinskyProgram& p, std::uint64_t max_steps) {
  check_minsky(p);
  MinskyRun run;
  run.c0 = 0;
  run.c1 = 0;
  while (run.steps < max_steps) {
    const MinskyInstr& ins = p.lines[run.line];
    if (ins.kind == MinskyInstr::Kind::stop) {
      run.halted = true;
      return run;
    }
    Nat& c = ins.counter == 0 ? run.c0 : run.c1;
    switch (ins.kind) {
      case MinskyInstr::Kind::inc:
        ++c;
        ++run.line;
        break;
      case MinskyInstr::Kind::dec:
        if (c > 0) --c;
        ++run.line;
        break;
      case MinskyInstr::Kind::ifzero:
        run.line = c == 0 ? ins.target : run.line + 1;
        break;
      case MinskyInstr::Kind::stop:
        break;
    }
    ++run.steps;
  }
  run.halted = p.lines[run.line].kind == MinskyInstr::Kind::stop;
  return run;
}

namespace detail {

inline ExprPtr afield(const char* key) {
  return Expr::field(OperandSide::left, Identifier(key));
}
inline ExprPtr bfield(const char* key) {
  return Expr::field(OperandSide::right, Identifier(key));
}
inline ExprPtr nat_lit(Nat v) { return Expr::nat(std::move(v)); }
inline ExprPtr bin(BinaryOp op, ExprPtr l, ExprPtr r) {
  return Expr::binary(op, std::move(l), std::move(r));
}
inline ExprPtr conj(ExprPtr l, ExprPtr r) {
  return bin(BinaryOp::logical_and, std::move(l), std::move(r));
}

// a.c0 = b.c0 & a.c1 = b.c1 & a.n = b.n: pins the self-pair of a
// configuration interval, so derivation chains stay linear.
inline ExprPtr same_config() {
  ExprPtr e = bin(BinaryOp::eq, afield("c0"), bfield("c0"));
  e = conj(std::move(e), bin(BinaryOp::eq, afield("c1"), bfield("c1")));
  e = conj(std::move(e), bin(BinaryOp::eq, afield("n"), bfield("n")));
  return e;
}

inline Identifier line_id(std::size_t line) { return Identifier("l" + std::to_string(line)); }

// Copies the configuration, applies delta to one counter, and advances the
// step counter n.
inline MapUpdate step_update(int counter, int delta) {
  auto touched = [&](const char* key, int which) -> ExprPtr {
    if (counter != which || delta == 0) return afield(key);
    if (delta > 0) return bin(BinaryOp::add, afield(key), nat_lit(1));
    return bin(BinaryOp::sub, afield(key), nat_lit(1));
  };
  MapUpdate psi;
  psi.assignments.push_back({Identifier("c0"), touched("c0", 0)});
  psi.assignments.push_back({Identifier("c1"), touched("c1", 1)});
  psi.assignments.push_back({Identifier("n"), bin(BinaryOp::add, afield("n"), nat_lit(1))});
  return psi;
}

inline InclusiveRule step_rule(std::size_t from, std::size_t to, ExprPtr guard, MapUpdate psi) {
  ExprPtr phi = guard ? conj(same_config(), std::move(guard)) : same_config();
  return InclusiveRule{line_id(to),          line_id(from), InclusiveOp::coincide,
                       line_id(from),        MapPredicate{std::move(phi)},
                       std::move(psi)};
}

}  // namespace detail

// One rule per transition; a halting run of s steps yields a chain of s + 1
// configuration intervals ending at the stop line's label. The step counter
// n keeps revisited configurations distinct, so a non-halting machine never
// saturates the pool.
inline CompiledInstance compile_minsky(const MinskyProgram& p) {
  check_minsky(p);
  CompiledInstance out{Spec{}, Trace{}, detail::line_id(p.lines.size() - 1), std::nullopt};
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    const MinskyInstr& ins = p.lines[i];
    const char* ckey = ins.counter == 0 ? "c0" : "c1";
    switch (ins.kind) {
      case MinskyInstr::Kind::inc:
        out.spec.rules.push_back(
            detail::step_rule(i, i + 1, nullptr, detail::step_update(ins.counter, +1)));
        break;
      case MinskyInstr::Kind::dec:
        out.spec.rules.push_back(
            detail::step_rule(i, i + 1, nullptr, detail::step_update(ins.counter, -1)));
        break;
      case MinskyInstr::Kind::ifzero:
        out.spec.rules.push_back(detail::step_rule(
            i, ins.target, detail::bin(BinaryOp::eq, detail::afield(ckey), detail::nat_lit(0)),
            detail::step_update(ins.counter, 0)));
        out.spec.rules.push_back(detail::step_rule(
            i, i + 1, detail::bin(BinaryOp::gt, detail::afield(ckey), detail::nat_lit(0)),
            detail::step_update(ins.counter, 0)));
        break;
      case MinskyInstr::Kind::stop:
        break;
    }
  }
  ValueMap start;
  start.set(Identifier("c0"), Value(Nat(0)));
  start.set(Identifier("c1"), Value(Nat(0)));
  start.set(Identifier("n"), Value(Nat(0)));
  out.trace.events.push_back(Event(detail::line_id(0), Nat(0), std::move(start)));
  return out;
}

// ---------------------------------------------------------------------------
// Quantified 3-CNF formulas.

enum class Quantifier { exists, forall };

struct QbfLiteral {
  std::size_t var = 0;  // index into the prefix
  bool negated = false;
};

using QbfClause = std::array<QbfLiteral, 3>;

// Fully quantified 3-CNF. Variable j is written as the (j+1)-th prime in
// the surface format.
struct Qbf {
  std::vector<Quantifier> prefix;
  std::vector<QbfClause> clauses;
};

inline std::vector<std::uint64_t> first_primes(std::size_t n) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; primes.size() < n; ++c) {
    bool prime = true;
    for (std::uint64_t p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

// Format: one prefix line of quantifier/prime pairs ("E 2 A 3"), then one
// line per clause of three signed primes ("2 -3 3").
inline Qbf parse_qbf(std::string_view text) {
  Qbf q;
  std::vector<std::uint64_t> primes;
  bool seen_prefix = false;
  std::size_t lineno = 0;
  std::istringstream stream{std::string(text)};
  std::string raw;
  while (std::getline(stream, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string head = raw.substr(0, raw.find('#'));
    std::istringstream words(head);
    std::vector<std::string> tok;
    std::string w;
    while (words >> w) tok.push_back(w);
    if (tok.empty()) continue;

    if (!seen_prefix) {
      if (tok.size() % 2 != 0) {
        throw ParseError(lineno, 0, "prefix must be quantifier/prime pairs");
      }
      std::size_t n = tok.size() / 2;
      std::vector<std::uint64_t> expected = first_primes(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::string& qtok = tok[2 * i];
        if (qtok == "E") {
          q.prefix.push_back(Quantifier::exists);
        } else if (qtok == "A") {
          q.prefix.push_back(Quantifier::forall);
        } else {
          throw ParseError(lineno, 0, "quantifier must be E or A; got '" + qtok + "'");
        }
        if (tok[2 * i + 1] != std::to_string(expected[i])) {
          throw ParseError(lineno, 0, "variable " + std::to_string(i + 1) + " must be prime " +
                                          std::to_string(expected[i]));
        }
      }
      if (q.prefix.empty()) throw ParseError(lineno, 0, "prefix must not be empty");
      primes = std::move(expected);
      seen_prefix = true;
      continue;
    }

    if (tok.size() != 3) throw ParseError(lineno, 0, "each clause needs exactly 3 literals");
    QbfClause clause;
    for (std::size_t i = 0; i < 3; ++i) {
      std::string lit = tok[i];
      QbfLiteral l;
      if (!lit.empty() && lit[0] == '-') {
        l.negated = true;
        lit = lit.substr(1);
      }
      auto it = std::find(primes.begin(), primes.end(),
                          std::uint64_t(std::strtoull(lit.c_str(), nullptr, 10)));
      if (lit.empty() || lit.find_first_not_of("0123456789") != std::string::npos ||
          it == primes.end()) {
        throw ParseError(lineno, 0, "literal '" + tok[i] + "' is not a prefix prime");
      }
      l.var = std::size_t(it - primes.begin());
      clause[i] = l;
    }
    q.clauses.push_back(clause);
  }
  if (!seen_prefix) throw ParseError(lineno, 0, "missing prefix line");
  return q;
}

inline std::string format_qbf(const Qbf& q) {
  std::vector<std::uint64_t> primes = first_primes(q.prefix.size());
  std::string out;
  for (std::size_t i = 0; i < q.prefix.size(); ++i) {
    if (i > 0) out += ' ';
    out += q.prefix[i] == Quantifier::exists ? "E " : "A ";
    out += std::to_string(primes[i]);
  }
  out += '\n';
  for (const QbfClause& clause : q.clauses) {
    for (std::size_t i = 0; i < 3; ++i) {
      if (i > 0) out += ' ';
      if (clause[i].negated) out += '-';
      out += std::to_string(primes[clause[i].var]);
    }
    out += '\n';
  }
  return out;
}

// Truth-table evaluation; exponential in the prefix length, guarded.
inline bool qbf_oracle(const Qbf& q) {
  if (q.prefix.size() > 20) throw std::invalid_argument("formula too large for the oracle");
  auto clauses_hold = [&](std::uint32_t mask) {
    for (const QbfClause& clause : q.clauses) {
      bool sat = false;
      for (const QbfLiteral& l : clause) {
        bool v = (mask >> l.var) & 1;
        if (v != l.negated) {
          sat = true;
          break;
        }
      }
      if (!sat) return false;
    }
    return true;
  };
  auto solve = [&](auto&& self, std::size_t j, std::uint32_t mask) -> bool {
    if (j == q.prefix.size()) return clauses_hold(mask);
    bool with_false = self(self, j + 1, mask);
    if (q.prefix[j] == Quantifier::exists && with_false) return true;
    if (q.prefix[j] == Quantifier::forall && !with_false) return false;
    return self(self, j + 1, mask | (std::uint32_t(1) << j));
  };
  return solve(solve, 0, 0);
}

namespace detail {

inline Identifier gen_id(std::size_t j) { return Identifier("G" + std::to_string(j)); }
inline Identifier val_id(std::size_t j) { return Identifier("C" + std::to_string(j)); }

inline ExprPtr same_s() { return bin(BinaryOp::eq, afield("s"), bfield("s")); }

inline MapUpdate keep_s() {
  MapUpdate psi;
  psi.assignments.push_back({Identifier("s"), afield("s")});
  return psi;
}

inline InclusiveRule coincide_rule(Identifier lhs, Identifier operand, ExprPtr phi,
                                   MapUpdate psi) {
  return InclusiveRule{std::move(lhs), operand,
                       InclusiveOp::coincide, operand,
                       MapPredicate{std::move(phi)}, std::move(psi)};
}

}  // namespace detail

// Valuations are products of the primes of true variables. Generator rules
// enumerate all products, the check rule keeps satisfying valuations, and
// quantifier rules strip primes innermost first. Arithmetic runs modulo
// 1 + (product of all primes); guards keep every product below that bound.
inline CompiledInstance compile_tqbf(const Qbf& q) {
  if (q.prefix.empty()) throw std::invalid_argument("prefix must not be empty");
  std::size_t n = q.prefix.size();
  std::vector<std::uint64_t> primes = first_primes(n);
  Nat bound = 1;
  for (std::uint64_t p : primes) bound *= p;
  bound += 1;

  CompiledInstance out{Spec{}, Trace{}, detail::val_id(0), bound};

  for (std::size_t j = 1; j <= n; ++j) {
    out.spec.rules.push_back(detail::coincide_rule(detail::gen_id(j), detail::gen_id(j - 1),
                                                   detail::same_s(), detail::keep_s()));
    MapUpdate mult;
    mult.assignments.push_back(
        {Identifier("s"),
         detail::bin(BinaryOp::mul, detail::afield("s"), detail::nat_lit(primes[j - 1]))});
    out.spec.rules.push_back(detail::coincide_rule(detail::gen_id(j), detail::gen_id(j - 1),
                                                   detail::same_s(), std::move(mult)));
  }

  // Satisfaction check: variable with prime p is true in valuation s iff
  // s % p = 0.
  ExprPtr check = detail::same_s();
  for (const QbfClause& clause : q.clauses) {
    ExprPtr body;
    for (const QbfLiteral& l : clause) {
      ExprPtr rem = detail::bin(BinaryOp::mod, detail::afield("s"),
                                detail::nat_lit(primes[l.var]));
      ExprPtr lit = l.negated ? detail::bin(BinaryOp::gt, std::move(rem), detail::nat_lit(0))
                              : detail::bin(BinaryOp::eq, std::move(rem), detail::nat_lit(0));
      body = body ? detail::bin(BinaryOp::logical_or, std::move(body), std::move(lit))
                  : std::move(lit);
    }
    check = detail::conj(std::move(check), std::move(body));
  }
  out.spec.rules.push_back(detail::coincide_rule(detail::val_id(n), detail::gen_id(n),
                                                 std::move(check), detail::keep_s()));

  for (std::size_t j = n; j >= 1; --j) {
    ExprPtr rem = detail::bin(BinaryOp::mod, detail::afield("s"), detail::nat_lit(primes[j - 1]));
    if (q.prefix[j - 1] == Quantifier::exists) {
      out.spec.rules.push_back(detail::coincide_rule(
          detail::val_id(j - 1), detail::val_id(j),
          detail::conj(detail::same_s(),
                       detail::bin(BinaryOp::gt, rem, detail::nat_lit(0))),
          detail::keep_s()));
      MapUpdate strip;
      strip.assignments.push_back(
          {Identifier("s"),
           detail::bin(BinaryOp::div, detail::afield("s"), detail::nat_lit(primes[j - 1]))});
      out.spec.rules.push_back(detail::coincide_rule(
          detail::val_id(j - 1), detail::val_id(j),
          detail::conj(detail::same_s(),
                       detail::bin(BinaryOp::eq, rem, detail::nat_lit(0))),
          std::move(strip)));
    } else {
      // Pair the var-false valuation with its var-true counterpart. The
      // divisibility guard also keeps a.s * p below the bound.
      ExprPtr guard = detail::conj(
          detail::bin(BinaryOp::gt, rem, detail::nat_lit(0)),
          detail::bin(BinaryOp::eq,
                      detail::bin(BinaryOp::mul, detail::afield("s"),
                                  detail::nat_lit(primes[j - 1])),
                      detail::bfield("s")));
      out.spec.rules.push_back(detail::coincide_rule(detail::val_id(j - 1), detail::val_id(j),
                                                     std::move(guard), detail::keep_s()));
    }
  }

  ValueMap seed;
  seed.set(Identifier("s"), Value(Nat(1)));
  out.trace.events.push_back(Event(detail::gen_id(0), Nat(0), std::move(seed)));
  return out;
}

// ---------------------------------------------------------------------------
// Repeated squaring: n chained rules double the bit length of d each step,
// so the final value is 2^(2^n) from a constant-size instance.

inline CompiledInstance compile_squares(std::size_t n) {
  CompiledInstance out{Spec{}, Trace{}, Identifier("e" + std::to_string(n)), std::nullopt};
  for (std::size_t j = 1; j <= n; ++j) {
    Identifier prev("e" + std::to_string(j - 1));
    MapUpdate square;
    square.assignments.push_back(
        {Identifier("d"), detail::bin(BinaryOp::mul, detail::afield("d"), detail::afield("d"))});
    out.spec.rules.push_back(InclusiveRule{
        Identifier("e" + std::to_string(j)), prev, InclusiveOp::coincide, prev,
        MapPredicate{detail::bin(BinaryOp::eq, detail::afield("d"), detail::bfield("d"))},
        std::move(square)});
  }
  ValueMap seed;
  seed.set(Identifier("d"), Value(Nat(2)));
  out.trace.events.push_back(Event(Identifier("e0"), Nat(0), std::move(seed)));
  return out;
}

}  // namespace nfer
