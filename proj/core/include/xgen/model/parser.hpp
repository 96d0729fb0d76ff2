#pragma once

#include <string_view>
#include <vector>

#include "xgen/model/ast.hpp"
#include "xgen/model/diagnostics.hpp"

namespace xgen::model {

/// Parses exactly one unit. Throws ParseError on the first lexical,
/// syntactic or structural fault.
ModelUnit parse_unit(std::string_view source, std::string_view file = {});

/// Parses every unit in `source`. Throws ParseError on the first fault.
std::vector<ModelUnit> parse_units(std::string_view source, std::string_view file = {});

struct ParseResult {
  std::vector<ModelUnit> units;  // possibly partial when diagnostics has errors
  std::vector<Diagnostic> diagnostics;
};

/// Error-recovering variant: a faulty item is dropped, the fault recorded,
/// and parsing resumes after the next `;`. Used for syntax-error counting.
ParseResult parse_units_recovering(std::string_view source, std::string_view file = {});

}  // namespace xgen::model
