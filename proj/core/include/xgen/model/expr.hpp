#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xgen::model {

/// Expression tree for equation right-hand sides, transform conditions and
/// action statements.
struct Expr {
  enum class Kind { Number, Bool, String, Ident, Unary, Binary, Call };

  Kind kind = Kind::Number;
  double number = 0.0;
  bool boolean = false;
  std::string text;  // identifier, operator, callee or string contents
  std::vector<Expr> args;
};

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grammar (lowest to highest): or, and, not, comparison, + -, * /, unary - !,
/// ^ (right associative), primary. `&&`, `||`, `!` alias and/or/not.
Expr parse_expression(std::string_view text);

struct ExprSymbols {
  std::set<std::string> variables;
  std::map<std::string, std::set<std::size_t>> calls;  // callee -> arities seen
};

void collect_symbols(const Expr& expr, ExprSymbols& out);

/// Names callable without a function unit.
bool is_builtin_function(std::string_view name);
/// Expected arity of a builtin (0 for `timeout`/`entry` markers).
std::size_t builtin_arity(std::string_view name);

/// Identifiers with a fixed meaning inside expressions (`time`, `pi`).
bool is_builtin_variable(std::string_view name);

}  // namespace xgen::model
