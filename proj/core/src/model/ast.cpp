#include "xgen/model/ast.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace xgen::model {

std::string_view to_string(UnitKind kind) {
  switch (kind) {
    case UnitKind::Couple: return "couple";
    case UnitKind::Discrete: return "discrete";
    case UnitKind::Continuous: return "continuous";
    case UnitKind::Function: return "function";
  }
  return "?";
}

std::optional<UnitKind> unit_kind_from_string(std::string_view text) {
  if (text == "couple") return UnitKind::Couple;
  if (text == "discrete") return UnitKind::Discrete;
  if (text == "continuous") return UnitKind::Continuous;
  if (text == "function") return UnitKind::Function;
  return std::nullopt;
}

std::string_view to_string(PortDirection dir) {
  return dir == PortDirection::Input ? "input" : "output";
}

const StateDef* StateMachine::find(std::string_view name) const {
  auto it = std::find_if(states.begin(), states.end(),
                         [&](const StateDef& s) { return s.name == name; });
  return it == states.end() ? nullptr : &*it;
}

const PortDecl* ModelUnit::find_port(std::string_view port) const {
  auto it = std::find_if(ports.begin(), ports.end(),
                         [&](const PortDecl& p) { return p.name == port; });
  return it == ports.end() ? nullptr : &*it;
}

const PartDecl* ModelUnit::find_part(std::string_view instance) const {
  auto it = std::find_if(parts.begin(), parts.end(),
                         [&](const PartDecl& p) { return p.instance_name == instance; });
  return it == parts.end() ? nullptr : &*it;
}

bool ModelUnit::imports_name(std::string_view name) const {
  return std::any_of(imports.begin(), imports.end(),
                     [&](const Import& i) { return i.name == name; });
}

namespace {

void strip(std::vector<Statement>& stmts) {
  for (auto& s : stmts) {
    s.span = {};
    if (auto* branch = std::get_if<IfStmt>(&s.node)) {
      strip(branch->then_body);
      strip(branch->else_body);
    }
  }
}

}  // namespace

ModelUnit strip_spans(ModelUnit unit) {
  unit.span = {};
  for (auto& i : unit.imports) i.span = {};
  for (auto& b : unit.parameters) b.span = {};
  for (auto& b : unit.values) b.span = {};
  for (auto& p : unit.ports) p.span = {};
  for (auto& p : unit.parts) p.span = {};
  for (auto& c : unit.connections) c.span = {};
  for (auto& e : unit.equations) e.span = {};
  if (unit.states) {
    for (auto& s : unit.states->states) {
      s.span = {};
      strip(s.entry_actions);
      for (auto& t : s.transforms) {
        t.span = {};
        strip(t.actions);
      }
    }
  }
  if (unit.body) strip(unit.body->statements);
  return unit;
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto c0 = static_cast<unsigned char>(text.front());
  if (!(std::isalpha(c0) || c0 == '_')) return false;
  return std::all_of(text.begin() + 1, text.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

const std::vector<std::string>& known_types() {
  static const std::vector<std::string> types = {"Real", "Int", "Bool", "String"};
  return types;
}

bool is_known_type(std::string_view type) {
  const auto& types = known_types();
  return std::find(types.begin(), types.end(), type) != types.end();
}

namespace {

bool parses_as_real(std::string_view text) {
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) text.remove_prefix(1);
  if (text.empty()) return false;
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

bool parses_as_int(std::string_view text) {
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) text.remove_prefix(1);
  return !text.empty() &&
         std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

bool literal_matches_type(std::string_view type, std::string_view literal) {
  if (type == "Real") return parses_as_real(literal);
  if (type == "Int") return parses_as_int(literal);
  if (type == "Bool") return literal == "true" || literal == "false";
  if (type == "String") return literal.size() >= 2 && literal.front() == '"' && literal.back() == '"';
  return false;
}

}  // namespace xgen::model
