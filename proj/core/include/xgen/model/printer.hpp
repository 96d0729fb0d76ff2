#pragma once

#include <map>
#include <string>
#include <vector>

#include "xgen/model/ast.hpp"

namespace xgen::model {

/// Canonical X text. Sections are emitted in template order and empty
/// sections are elided, so parse(print(u)) equals u up to spans.
std::string print_unit(const ModelUnit& unit);

/// Units separated by a blank line.
std::string print_units(const std::vector<ModelUnit>& units);

/// As print_unit, but wherever a section listed in `markers` is empty the
/// mapped text (e.g. a hole comment) is emitted in its canonical slot.
std::string print_unit_with_markers(const ModelUnit& unit,
                                    const std::map<std::string, std::string>& markers);

/// Individual section renderers ("value:\n  Real x = 0;\n"), empty string when
/// the section has no items.
std::string print_section(const ModelUnit& unit, std::string_view section);

std::string format_number(double value);

}  // namespace xgen::model
