#include "xgen/model/expr.hpp"

#include <charconv>

#include <fmt/format.h>

#include "xgen/model/lexer.hpp"

namespace xgen::model {

namespace {

struct BuiltinInfo {
  std::string_view name;
  std::size_t arity;
};

constexpr BuiltinInfo kBuiltins[] = {
    {"sin", 1}, {"cos", 1}, {"exp", 1}, {"log", 1}, {"abs", 1},
    {"min", 2}, {"max", 2}, {"uniform", 2}, {"timeout", 0},
};

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : toks_(tokenize(text)), text_(text) {}

  Expr run() {
    if (cur().kind == TokenKind::End) throw ExprError("empty expression");
    Expr e = parse_or();
    if (cur().kind != TokenKind::End)
      throw ExprError(fmt::format("unexpected '{}' in expression '{}'", cur().text, text_));
    return e;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  const Token& advance() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }
  bool accept(std::string_view t) {
    if (cur().is(t)) {
      advance();
      return true;
    }
    return false;
  }

  static Expr binary(std::string op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = Expr::Kind::Binary;
    e.text = std::move(op);
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }
  static Expr unary(std::string op, Expr operand) {
    Expr e;
    e.kind = Expr::Kind::Unary;
    e.text = std::move(op);
    e.args.push_back(std::move(operand));
    return e;
  }

  Expr parse_or() {
    Expr lhs = parse_and();
    while (cur().is("or") || cur().is("||")) {
      advance();
      lhs = binary("or", std::move(lhs), parse_and());
    }
    return lhs;
  }
  Expr parse_and() {
    Expr lhs = parse_not();
    while (cur().is("and") || cur().is("&&")) {
      advance();
      lhs = binary("and", std::move(lhs), parse_not());
    }
    return lhs;
  }
  Expr parse_not() {
    if (cur().is("not")) {
      advance();
      return unary("not", parse_not());
    }
    return parse_comparison();
  }
  Expr parse_comparison() {
    Expr lhs = parse_additive();
    for (std::string_view op : {"<", "<=", ">", ">=", "==", "!="}) {
      if (cur().kind == TokenKind::Punct && cur().text == op) {
        advance();
        return binary(std::string(op), std::move(lhs), parse_additive());
      }
    }
    return lhs;
  }
  Expr parse_additive() {
    Expr lhs = parse_multiplicative();
    while (cur().is("+") || cur().is("-")) {
      std::string op = advance().text;
      lhs = binary(op, std::move(lhs), parse_multiplicative());
    }
    return lhs;
  }
  Expr parse_multiplicative() {
    Expr lhs = parse_unary();
    while (cur().is("*") || cur().is("/")) {
      std::string op = advance().text;
      lhs = binary(op, std::move(lhs), parse_unary());
    }
    return lhs;
  }
  Expr parse_unary() {
    if (cur().is("-") || cur().is("+")) {
      std::string op = advance().text;
      return unary(op, parse_unary());
    }
    if (cur().is("!")) {
      advance();
      return unary("not", parse_unary());
    }
    return parse_power();
  }
  Expr parse_power() {
    Expr base = parse_primary();
    if (accept("^")) return binary("^", std::move(base), parse_unary());
    return base;
  }
  Expr parse_primary() {
    const Token& t = cur();
    Expr e;
    switch (t.kind) {
      case TokenKind::Number: {
        e.kind = Expr::Kind::Number;
        const std::string& s = advance().text;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), e.number);
        if (ec != std::errc{}) throw ExprError(fmt::format("bad number '{}'", s));
        return e;
      }
      case TokenKind::String: {
        e.kind = Expr::Kind::String;
        const std::string& s = advance().text;
        e.text = s.substr(1, s.size() - 2);
        return e;
      }
      case TokenKind::Identifier: {
        std::string name = advance().text;
        if (name == "true" || name == "false") {
          e.kind = Expr::Kind::Bool;
          e.boolean = name == "true";
          return e;
        }
        if (accept("(")) {
          e.kind = Expr::Kind::Call;
          e.text = std::move(name);
          if (!cur().is(")")) {
            do {
              e.args.push_back(parse_or());
            } while (accept(","));
          }
          if (!accept(")")) throw ExprError(fmt::format("missing ')' in call to '{}'", e.text));
          return e;
        }
        e.kind = Expr::Kind::Ident;
        e.text = std::move(name);
        return e;
      }
      case TokenKind::Punct:
        if (t.is("(")) {
          advance();
          Expr inner = parse_or();
          if (!accept(")")) throw ExprError("missing ')'");
          return inner;
        }
        break;
      default:
        break;
    }
    throw ExprError(fmt::format("unexpected '{}' in expression '{}'",
                                t.kind == TokenKind::End ? std::string("end") : t.text, text_));
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::string_view text_;
};

}  // namespace

Expr parse_expression(std::string_view text) { return ExprParser(text).run(); }

void collect_symbols(const Expr& expr, ExprSymbols& out) {
  if (expr.kind == Expr::Kind::Ident) out.variables.insert(expr.text);
  if (expr.kind == Expr::Kind::Call) out.calls[expr.text].insert(expr.args.size());
  for (const auto& a : expr.args) collect_symbols(a, out);
}

bool is_builtin_function(std::string_view name) {
  for (const auto& b : kBuiltins)
    if (b.name == name) return true;
  return false;
}

std::size_t builtin_arity(std::string_view name) {
  for (const auto& b : kBuiltins)
    if (b.name == name) return b.arity;
  return 0;
}

bool is_builtin_variable(std::string_view name) { return name == "time" || name == "pi"; }

}  // namespace xgen::model
