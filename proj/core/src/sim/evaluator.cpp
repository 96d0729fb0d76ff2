#include "xgen/sim/evaluator.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace xgen::sim {

using model::Expr;

namespace {

constexpr int kMaxCallDepth = 64;

const char* type_name(const Value& v) {
  if (std::holds_alternative<double>(v)) return "Real";
  if (std::holds_alternative<bool>(v)) return "Bool";
  return "String";
}

}  // namespace

double as_number(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
  throw EvalError(fmt::format("expected a number, got String \"{}\"", std::get<std::string>(v)));
}

bool truthy(const Value& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  if (const auto* d = std::get_if<double>(&v)) return *d != 0.0;
  throw EvalError("String used as a condition");
}

ExecContext::ExecContext(const std::vector<model::ModelUnit>& units, std::uint64_t seed) : rng_(seed) {
  for (const auto& unit : units)
    if (unit.kind == model::UnitKind::Function) functions_.emplace(unit.name, unit);
}

bool ExecContext::has_function(std::string_view name) const {
  return functions_.find(name) != functions_.end();
}

const Expr& ExecContext::compile(const std::string& text) {
  auto it = cache_.find(text);
  if (it != cache_.end()) return it->second;
  try {
    return cache_.emplace(text, model::parse_expression(text)).first->second;
  } catch (const model::ExprError& e) {
    throw EvalError(fmt::format("malformed expression '{}': {}", text, e.what()));
  }
}

Value ExecContext::eval(const Expr& expr, const Scope& scope) {
  switch (expr.kind) {
    case Expr::Kind::Number: return expr.number;
    case Expr::Kind::Bool: return expr.boolean;
    case Expr::Kind::String: return expr.text;
    case Expr::Kind::Ident: {
      for (const Env* frame : scope.frames) {
        auto it = frame->find(expr.text);
        if (it != frame->end()) return it->second;
      }
      if (expr.text == "time") return scope.time;
      if (expr.text == "pi") return std::numbers::pi;
      throw EvalError(fmt::format("unknown identifier '{}'", expr.text));
    }
    case Expr::Kind::Unary: {
      Value operand = eval(expr.args[0], scope);
      if (expr.text == "not") return !truthy(operand);
      double x = as_number(operand);
      return expr.text == "-" ? -x : x;
    }
    case Expr::Kind::Binary: {
      const auto& op = expr.text;
      if (op == "and") return truthy(eval(expr.args[0], scope)) && truthy(eval(expr.args[1], scope));
      if (op == "or") return truthy(eval(expr.args[0], scope)) || truthy(eval(expr.args[1], scope));
      Value lhs = eval(expr.args[0], scope);
      Value rhs = eval(expr.args[1], scope);
      if (op == "==" || op == "!=") {
        bool equal;
        if (is_numeric(lhs) || is_numeric(rhs))
          equal = lhs.index() == rhs.index() ? lhs == rhs : as_number(lhs) == as_number(rhs);
        else
          equal = lhs == rhs;
        return op == "==" ? equal : !equal;
      }
      if (op == "+" && std::holds_alternative<std::string>(lhs) &&
          std::holds_alternative<std::string>(rhs))
        return std::get<std::string>(lhs) + std::get<std::string>(rhs);
      if (std::holds_alternative<std::string>(lhs) || std::holds_alternative<std::string>(rhs))
        throw EvalError(fmt::format("operator '{}' not defined for {} and {}", op, type_name(lhs),
                                    type_name(rhs)));
      double a = as_number(lhs);
      double b = as_number(rhs);
      if (op == "+") return a + b;
      if (op == "-") return a - b;
      if (op == "*") return a * b;
      if (op == "/") {
        if (b == 0.0) throw EvalError("division by zero");
        return a / b;
      }
      if (op == "^") return std::pow(a, b);
      if (op == "<") return a < b;
      if (op == "<=") return a <= b;
      if (op == ">") return a > b;
      if (op == ">=") return a >= b;
      throw EvalError(fmt::format("unknown operator '{}'", op));
    }
    case Expr::Kind::Call: return call(expr, scope);
  }
  throw EvalError("unreachable expression kind");
}

Value ExecContext::call(const Expr& expr, const Scope& scope) {
  const auto& name = expr.text;
  if (name == "timeout") return scope.timeout;
  std::vector<Value> args;
  args.reserve(expr.args.size());
  for (const auto& a : expr.args) args.push_back(eval(a, scope));

  auto arg = [&](std::size_t i) { return as_number(args[i]); };
  auto want = [&](std::size_t n) {
    if (args.size() != n)
      throw EvalError(fmt::format("'{}' expects {} argument(s), got {}", name, n, args.size()));
  };
  if (model::is_builtin_function(name)) {
    if (name == "sin") return want(1), std::sin(arg(0));
    if (name == "cos") return want(1), std::cos(arg(0));
    if (name == "exp") return want(1), std::exp(arg(0));
    if (name == "abs") return want(1), std::fabs(arg(0));
    if (name == "log") {
      want(1);
      if (arg(0) <= 0.0) throw EvalError("log of a non-positive value");
      return std::log(arg(0));
    }
    if (name == "min") return want(2), std::min(arg(0), arg(1));
    if (name == "max") return want(2), std::max(arg(0), arg(1));
    if (name == "uniform") {
      want(2);
      double unit = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      return arg(0) + (arg(1) - arg(0)) * unit;
    }
  }
  return call_function(name, std::move(args), scope.time);
}

Value ExecContext::call_function(std::string_view name, std::vector<Value> args, double time) {
  auto it = functions_.find(name);
  if (it == functions_.end()) throw EvalError(fmt::format("unknown function '{}'", name));
  const auto& body = *it->second.body;
  if (args.size() != body.params.size())
    throw EvalError(fmt::format("'{}' expects {} argument(s), got {}", name, body.params.size(),
                                args.size()));
  if (depth_ >= kMaxCallDepth) throw EvalError(fmt::format("call depth exceeded in '{}'", name));

  Env locals;
  for (std::size_t i = 0; i < args.size(); ++i) locals[body.params[i].name] = std::move(args[i]);
  Scope scope{{&locals}, time, false};
  ++depth_;
  std::optional<Value> result;
  try {
    result = run(body.statements, scope, [&](const std::string& target, Value v) {
      locals[target] = std::move(v);
    });
  } catch (...) {
    --depth_;
    throw;
  }
  --depth_;
  if (!result) throw EvalError(fmt::format("function '{}' ended without return", name));
  return *result;
}

std::optional<Value> ExecContext::run(const std::vector<model::Statement>& statements,
                                      const Scope& scope, const AssignFn& assign) {
  for (const auto& stmt : statements) {
    if (const auto* a = std::get_if<model::AssignStmt>(&stmt.node)) {
      assign(a->target, eval(a->expr, scope));
    } else if (const auto* i = std::get_if<model::IfStmt>(&stmt.node)) {
      const auto& branch = truthy(eval(i->condition, scope)) ? i->then_body : i->else_body;
      if (auto r = run(branch, scope, assign)) return r;
    } else if (const auto* r = std::get_if<model::ReturnStmt>(&stmt.node)) {
      return eval(r->expr, scope);
    }
  }
  return std::nullopt;
}

}  // namespace xgen::sim
