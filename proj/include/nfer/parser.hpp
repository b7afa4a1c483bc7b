// Surface syntax for rule sets: recursive-descent parser and a printer
// whose output parses back to the same rules.
#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "nfer/analysis.hpp"
#include "nfer/core.hpp"
#include "nfer/expr.hpp"
#include "nfer/rules.hpp"

namespace nfer {

namespace detail {

enum class TokKind {
  ident, number,
  arrow, assign, dot, comma, lparen, rparen, lbrace, rbrace,
  lt, le, gt, ge, eq, plus, minus, star, slash, percent, amp, pipe, bang,
  end
};

struct Token {
  TokKind kind;
  std::string text;  // ident name or number digits
  std::size_t line = 1;
  std::size_t column = 1;
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_rest(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline std::vector<Token> lex_spec(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t col = 1;
  std::size_t i = 0;
  auto push = [&](TokKind kind, std::string tok_text, std::size_t tok_col) {
    out.push_back(Token{kind, std::move(tok_text), line, tok_col});
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    std::size_t start_col = col;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_rest(text[j])) ++j;
      push(TokKind::ident, std::string(text.substr(i, j - i)), start_col);
      col += j - i;
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      push(TokKind::number, std::string(text.substr(i, j - i)), start_col);
      col += j - i;
      i = j;
      continue;
    }
    auto two = [&](char next) { return i + 1 < text.size() && text[i + 1] == next; };
    switch (c) {
      case '<':
        if (two('-')) { push(TokKind::arrow, "<-", start_col); i += 2; col += 2; continue; }
        if (two('=')) { push(TokKind::le, "<=", start_col); i += 2; col += 2; continue; }
        push(TokKind::lt, "<", start_col); ++i; ++col; continue;
      case '>':
        if (two('=')) { push(TokKind::ge, ">=", start_col); i += 2; col += 2; continue; }
        push(TokKind::gt, ">", start_col); ++i; ++col; continue;
      case ':':
        if (two('=')) { push(TokKind::assign, ":=", start_col); i += 2; col += 2; continue; }
        throw ParseError(line, start_col, "expected ':=' after ':'");
      case '.': push(TokKind::dot, ".", start_col); ++i; ++col; continue;
      case ',': push(TokKind::comma, ",", start_col); ++i; ++col; continue;
      case '(': push(TokKind::lparen, "(", start_col); ++i; ++col; continue;
      case ')': push(TokKind::rparen, ")", start_col); ++i; ++col; continue;
      case '{': push(TokKind::lbrace, "{", start_col); ++i; ++col; continue;
      case '}': push(TokKind::rbrace, "}", start_col); ++i; ++col; continue;
      case '=': push(TokKind::eq, "=", start_col); ++i; ++col; continue;
      case '+': push(TokKind::plus, "+", start_col); ++i; ++col; continue;
      case '-': push(TokKind::minus, "-", start_col); ++i; ++col; continue;
      case '*': push(TokKind::star, "*", start_col); ++i; ++col; continue;
      case '/': push(TokKind::slash, "/", start_col); ++i; ++col; continue;
      case '%': push(TokKind::percent, "%", start_col); ++i; ++col; continue;
      case '&': push(TokKind::amp, "&", start_col); ++i; ++col; continue;
      case '|': push(TokKind::pipe, "|", start_col); ++i; ++col; continue;
      case '!': push(TokKind::bang, "!", start_col); ++i; ++col; continue;
      default:
        throw ParseError(line, start_col, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back(Token{TokKind::end, "", line, col});
  return out;
}

inline const std::unordered_set<std::string>& reserved_words() {
  static const std::unordered_set<std::string> words{
      "before", "meet", "during", "coincide", "start", "finish", "overlap", "slice",
      "after", "follow", "contain", "unless", "where", "map", "true", "false"};
  return words;
}

inline std::optional<InclusiveOp> inclusive_op_from(const std::string& word) {
  if (word == "before") return InclusiveOp::before;
  if (word == "meet") return InclusiveOp::meet;
  if (word == "during") return InclusiveOp::during;
  if (word == "coincide") return InclusiveOp::coincide;
  if (word == "start") return InclusiveOp::start;
  if (word == "finish") return InclusiveOp::finish;
  if (word == "overlap") return InclusiveOp::overlap;
  if (word == "slice") return InclusiveOp::slice;
  return std::nullopt;
}

inline std::optional<ExclusiveOp> exclusive_op_from(const std::string& word) {
  if (word == "after") return ExclusiveOp::after;
  if (word == "follow") return ExclusiveOp::follow;
  if (word == "contain") return ExclusiveOp::contain;
  return std::nullopt;
}

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : tokens_(lex_spec(text)) {}

  Spec parse() {
    Spec spec;
    while (!at(TokKind::end)) spec.rules.push_back(parse_rule());
    return spec;
  }

 private:
  const Token& cur() const { return tokens_[pos_]; }
  bool at(TokKind kind) const { return cur().kind == kind; }
  bool at_word(const char* word) const { return at(TokKind::ident) && cur().text == word; }

  Token take() { return tokens_[pos_++]; }

  Token expect(TokKind kind, const char* what) {
    if (!at(kind)) throw ParseError(cur().line, cur().column, std::string("expected ") + what);
    return take();
  }

  Identifier expect_label() {
    Token t = expect(TokKind::ident, "an identifier");
    if (reserved_words().count(t.text)) {
      throw ParseError(t.line, t.column, "'" + t.text + "' is a reserved word");
    }
    return Identifier(t.text);
  }

  Rule parse_rule() {
    Identifier lhs = expect_label();
    expect(TokKind::arrow, "'<-'");
    Identifier first = expect_label();

    if (at_word("unless")) {
      take();
      Token op_tok = expect(TokKind::ident, "an exclusion operator");
      auto op = exclusive_op_from(op_tok.text);
      if (!op) {
        throw ParseError(op_tok.line, op_tok.column,
                         "expected one of after, follow, contain; got '" + op_tok.text + "'");
      }
      Identifier second = expect_label();
      auto [phi, psi] = parse_clauses();
      return ExclusiveRule{std::move(lhs), std::move(first), *op, std::move(second),
                           std::move(phi), std::move(psi)};
    }

    Token op_tok = expect(TokKind::ident, "a relation operator");
    auto op = inclusive_op_from(op_tok.text);
    if (!op) {
      throw ParseError(op_tok.line, op_tok.column,
                       "expected a relation operator or 'unless'; got '" + op_tok.text + "'");
    }
    Identifier second = expect_label();
    auto [phi, psi] = parse_clauses();
    return InclusiveRule{std::move(lhs), std::move(first), *op, std::move(second), std::move(phi),
                         std::move(psi)};
  }

  std::pair<MapPredicate, MapUpdate> parse_clauses() {
    MapPredicate phi = MapPredicate::always();
    MapUpdate psi;
    if (at_word("where")) {
      take();
      phi.body = parse_expr();
    }
    if (at_word("map")) {
      take();
      expect(TokKind::lbrace, "'{'");
      if (!at(TokKind::rbrace)) {
        while (true) {
          Token key_tok = cur();
          Identifier key = expect_label();
          for (const MapAssignment& a : psi.assignments) {
            if (a.key == key) {
              throw ParseError(key_tok.line, key_tok.column,
                               "duplicate key '" + key.name() + "' in map clause");
            }
          }
          expect(TokKind::assign, "':='");
          psi.assignments.push_back(MapAssignment{std::move(key), parse_expr()});
          if (!at(TokKind::comma)) break;
          take();
        }
      }
      expect(TokKind::rbrace, "'}'");
    }
    return {std::move(phi), std::move(psi)};
  }

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (at(TokKind::pipe)) {
      take();
      lhs = Expr::binary(BinaryOp::logical_or, std::move(lhs), parse_and());
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_not();
    while (at(TokKind::amp)) {
      take();
      lhs = Expr::binary(BinaryOp::logical_and, std::move(lhs), parse_not());
    }
    return lhs;
  }

  ExprPtr parse_not() {
    if (at(TokKind::bang)) {
      take();
      return Expr::negation(parse_not());
    }
    return parse_comparison();
  }

  std::optional<BinaryOp> comparison_op() const {
    switch (cur().kind) {
      case TokKind::lt: return BinaryOp::lt;
      case TokKind::le: return BinaryOp::le;
      case TokKind::gt: return BinaryOp::gt;
      case TokKind::ge: return BinaryOp::ge;
      case TokKind::eq: return BinaryOp::eq;
      default: return std::nullopt;
    }
  }

  ExprPtr parse_comparison() {
    ExprPtr lhs = parse_additive();
    while (auto op = comparison_op()) {
      take();
      lhs = Expr::binary(*op, std::move(lhs), parse_additive());
    }
    return lhs;
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_multiplicative();
    while (at(TokKind::plus) || at(TokKind::minus)) {
      BinaryOp op = at(TokKind::plus) ? BinaryOp::add : BinaryOp::sub;
      take();
      lhs = Expr::binary(op, std::move(lhs), parse_multiplicative());
    }
    return lhs;
  }

  ExprPtr parse_multiplicative() {
    ExprPtr lhs = parse_atom();
    while (at(TokKind::star) || at(TokKind::slash) || at(TokKind::percent)) {
      BinaryOp op = at(TokKind::star)    ? BinaryOp::mul
                    : at(TokKind::slash) ? BinaryOp::div
                                         : BinaryOp::mod;
      take();
      lhs = Expr::binary(op, std::move(lhs), parse_atom());
    }
    return lhs;
  }

  ExprPtr parse_atom() {
    if (at(TokKind::number)) {
      Token t = take();
      return Expr::nat(Nat(t.text));
    }
    if (at_word("true")) {
      take();
      return Expr::boolean(true);
    }
    if (at_word("false")) {
      take();
      return Expr::boolean(false);
    }
    if (at(TokKind::lparen)) {
      take();
      ExprPtr inner = parse_expr();
      expect(TokKind::rparen, "')'");
      return inner;
    }
    if (at(TokKind::ident) && (cur().text == "a" || cur().text == "b")) {
      Token t = take();
      OperandSide side = t.text == "a" ? OperandSide::left : OperandSide::right;
      expect(TokKind::dot, "'.' after operand name");
      Token key = expect(TokKind::ident, "a field name");
      return Expr::field(side, Identifier(key.text));
    }
    throw ParseError(cur().line, cur().column,
                     "expected a literal, field reference, or parenthesized term");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a rule set. Throws ParseError with a position on bad input.
inline Spec parse_spec(std::string_view text) { return detail::SpecParser(text).parse(); }

namespace detail {

// Precedence bands: or 1, and 2, not 3, comparisons 4, additive 5,
// multiplicative 6, atoms 7.
inline int expr_precedence(const ExprPtr& e) {
  const auto& node = e->node();
  if (std::holds_alternative<NotExpr>(node)) return 3;
  if (const auto* bin = std::get_if<BinaryExpr>(&node)) {
    switch (bin->op) {
      case BinaryOp::logical_or: return 1;
      case BinaryOp::logical_and: return 2;
      case BinaryOp::lt:
      case BinaryOp::le:
      case BinaryOp::gt:
      case BinaryOp::ge:
      case BinaryOp::eq: return 4;
      case BinaryOp::add:
      case BinaryOp::sub: return 5;
      case BinaryOp::mul:
      case BinaryOp::div:
      case BinaryOp::mod: return 6;
    }
  }
  return 7;
}

inline const char* binary_op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::mod: return "%";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::eq: return "=";
    case BinaryOp::logical_and: return "&";
    case BinaryOp::logical_or: return "|";
  }
  return "?";
}

inline void print_expr_into(const ExprPtr& e, int min_prec, std::string& out) {
  int prec = expr_precedence(e);
  bool parens = prec < min_prec;
  if (parens) out += '(';
  const auto& node = e->node();
  if (const auto* lit = std::get_if<NatLiteral>(&node)) {
    out += lit->value.str();
  } else if (const auto* lit = std::get_if<BoolLiteral>(&node)) {
    out += lit->value ? "true" : "false";
  } else if (const auto* field = std::get_if<FieldRef>(&node)) {
    out += field->side == OperandSide::left ? 'a' : 'b';
    out += '.';
    out += field->key.name();
  } else if (const auto* bin = std::get_if<BinaryExpr>(&node)) {
    print_expr_into(bin->lhs, prec, out);
    out += ' ';
    out += binary_op_text(bin->op);
    out += ' ';
    print_expr_into(bin->rhs, prec + 1, out);
  } else {
    const auto& neg = std::get<NotExpr>(node);
    out += "! ";
    print_expr_into(neg.operand, 3, out);
  }
  if (parens) out += ')';
}

}  // namespace detail

inline std::string print_expr(const ExprPtr& e) {
  std::string out;
  detail::print_expr_into(e, 0, out);
  return out;
}

inline std::string print_rule(const Rule& rule) {
  std::string out;
  const MapPredicate* phi;
  const MapUpdate* psi;
  if (const auto* inc = std::get_if<InclusiveRule>(&rule)) {
    out = inc->lhs.name() + " <- " + inc->left.name() + " " + op_text(inc->op) + " " +
          inc->right.name();
    phi = &inc->phi;
    psi = &inc->psi;
  } else {
    const auto& exc = std::get<ExclusiveRule>(rule);
    out = exc.lhs.name() + " <- " + exc.included.name() + " unless " + op_text(exc.op) + " " +
          exc.excluded.name();
    phi = &exc.phi;
    psi = &exc.psi;
  }
  const auto* lit = std::get_if<BoolLiteral>(&phi->body->node());
  if (!lit || !lit->value) {
    out += " where ";
    detail::print_expr_into(phi->body, 0, out);
  }
  if (!psi->assignments.empty()) {
    out += " map { ";
    bool first = true;
    for (const MapAssignment& a : psi->assignments) {
      if (!first) out += ", ";
      first = false;
      out += a.key.name() + " := ";
      detail::print_expr_into(a.value, 0, out);
    }
    out += " }";
  }
  return out;
}

/// One rule per line; parsing the output yields the same rule set.
inline std::string print_spec(const Spec& spec) {
  std::string out;
  for (const Rule& r : spec.rules) {
    out += print_rule(r);
    out += '\n';
  }
  return out;
}

}  // namespace nfer
