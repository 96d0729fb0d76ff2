#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xgen/model/ast.hpp"
#include "xgen/model/diagnostics.hpp"

namespace xgen::model {

struct InstanceNode {
  std::string path;      // dotted; the root's path is the top unit's name
  std::string instance;  // empty for the root
  std::size_t unit = 0;  // index into LinkedModel::units
  std::vector<InstanceNode> children;
};

/// A model set whose every part, port and call reference has been resolved.
struct LinkedModel {
  std::vector<ModelUnit> units;
  std::size_t top = 0;
  InstanceNode root;
  /// Directions of couple ports, inferred from connection usage.
  std::map<std::string, std::map<std::string, PortDirection>> couple_port_directions;

  const ModelUnit* find(std::string_view name) const;
  const ModelUnit& top_unit() const { return units[top]; }
  std::optional<PortDirection> port_direction(const ModelUnit& unit, std::string_view port) const;
};

struct LinkOptions {
  std::optional<std::string> top;  // inferred when absent
};

struct LinkResult {
  std::optional<LinkedModel> model;  // set only when there are no errors
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return model.has_value(); }
};

/// Resolves parts, connection endpoints and calls; reports every failure.
LinkResult link_model_set(std::vector<ModelUnit> units, const LinkOptions& options = {});

/// Function-unit name -> parameter count.
using FunctionTable = std::map<std::string, std::size_t, std::less<>>;

FunctionTable function_table(const std::vector<ModelUnit>& units);

/// Checks identifiers, assignment targets and calls inside one unit's
/// expressions. With `allow_unknown_calls`, calls that are neither builtin nor
/// in `functions` are accepted (they are generated later).
std::vector<Diagnostic> check_unit_symbols(const ModelUnit& unit, const FunctionTable& functions,
                                           bool allow_unknown_calls = false);

/// Non-builtin callees referenced by the unit, sorted.
std::vector<std::string> called_functions(const ModelUnit& unit);

}  // namespace xgen::model
