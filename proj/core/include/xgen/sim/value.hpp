#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace xgen::sim {

/// Runtime value of a port, parameter or value. Int is carried as a double.
using Value = std::variant<double, bool, std::string>;

std::string format_value(const Value& v);

/// Inverse of format_value for trace files: "true"/"false" become Bool,
/// numeric text becomes Real, anything else a String.
Value parse_value(std::string_view text);

/// Value a declaration of `type` holds before anything is assigned.
Value default_value(std::string_view type);

/// Value of a literal as written in a binding or port declaration.
Value literal_value(std::string_view type, std::string_view literal);

bool is_numeric(const Value& v);

}  // namespace xgen::sim
