#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xgen/model/ast.hpp"
#include "xgen/model/expr.hpp"
#include "xgen/sim/value.hpp"

namespace xgen::sim {

using Env = std::map<std::string, Value, std::less<>>;

/// Evaluation failure; the kernel wraps it into a RuntimeFault with time and path.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Variable frames searched front to back, plus the implicit `time` and
/// whether `timeout()` currently holds.
struct Scope {
  std::vector<const Env*> frames;
  double time = 0.0;
  bool timeout = false;
};

using AssignFn = std::function<void(const std::string& target, Value value)>;

/// Shared evaluation services for one simulation run: compiled-expression
/// cache, function units, and the seeded generator behind `uniform`.
class ExecContext {
 public:
  explicit ExecContext(const std::vector<model::ModelUnit>& units = {}, std::uint64_t seed = 0);

  const model::Expr& compile(const std::string& text);

  Value eval(const model::Expr& expr, const Scope& scope);
  Value eval(const std::string& text, const Scope& scope) { return eval(compile(text), scope); }

  /// Runs statements; returns the value of the first executed `return`.
  std::optional<Value> run(const std::vector<model::Statement>& statements, const Scope& scope,
                           const AssignFn& assign);

  Value call_function(std::string_view name, std::vector<Value> args, double time);

  bool has_function(std::string_view name) const;

 private:
  Value call(const model::Expr& expr, const Scope& scope);

  std::map<std::string, model::ModelUnit, std::less<>> functions_;
  std::map<std::string, model::Expr, std::less<>> cache_;
  std::mt19937_64 rng_;
  int depth_ = 0;
};

double as_number(const Value& v);
bool truthy(const Value& v);

}  // namespace xgen::sim
