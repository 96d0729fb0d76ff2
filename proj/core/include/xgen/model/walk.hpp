#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "xgen/model/ast.hpp"

namespace xgen::model {

enum class ExprRole { Condition, Value, Return };

struct ExprSite {
  std::string_view text;
  ExprRole role;
  const SourceSpan& span;
  std::string_view section;  // "state", "equation" or "function"
};

struct AssignSite {
  std::string_view target;
  bool derivative;
  const SourceSpan& span;
  std::string_view section;
};

/// Visits every expression and assignment target in the unit's behavior
/// (states, equations, function body), in source order.
void walk_unit(const ModelUnit& unit, const std::function<void(const ExprSite&)>& on_expr,
               const std::function<void(const AssignSite&)>& on_assign = {});

}  // namespace xgen::model
