#include "xgen/sim/value.hpp"

#include <charconv>
#include <limits>

#include "xgen/model/printer.hpp"

namespace xgen::sim {

std::string format_value(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return model::format_number(*d);
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  return std::get<std::string>(v);
}

Value parse_value(std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double d = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (ec == std::errc{} && ptr == text.data() + text.size()) return d;
  return std::string(text);
}

Value default_value(std::string_view type) {
  if (type == "Bool") return false;
  if (type == "String") return std::string();
  return 0.0;
}

Value literal_value(std::string_view type, std::string_view literal) {
  if (type == "Bool") return literal == "true";
  if (type == "String") {
    if (literal.size() >= 2) return std::string(literal.substr(1, literal.size() - 2));
    return std::string();
  }
  std::string_view digits = literal;
  bool negative = false;
  if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) {
    negative = digits.front() == '-';
    digits.remove_prefix(1);
  }
  double d = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), d);
  return negative ? -d : d;
}

bool is_numeric(const Value& v) { return std::holds_alternative<double>(v); }

}  // namespace xgen::sim
