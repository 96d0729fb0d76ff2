#include "xgen/model/printer.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace xgen::model {

namespace {

constexpr std::string_view kIndent = "  ";

std::string indent(int depth) {
  std::string s;
  for (int i = 0; i < depth; ++i) s += kIndent;
  return s;
}

void print_statements(std::string& out, const std::vector<Statement>& stmts, int depth);

void print_statement(std::string& out, const Statement& stmt, int depth) {
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, AssignStmt>) {
          out += fmt::format("{}{} = {};\n", indent(depth), node.target, node.expr);
        } else if constexpr (std::is_same_v<T, ReturnStmt>) {
          out += fmt::format("{}return {};\n", indent(depth), node.expr);
        } else {
          out += fmt::format("{}if {} then\n", indent(depth), node.condition);
          print_statements(out, node.then_body, depth + 1);
          if (!node.else_body.empty()) {
            out += indent(depth) + "else\n";
            print_statements(out, node.else_body, depth + 1);
          }
          out += indent(depth) + "end;\n";
        }
      },
      stmt.node);
}

void print_statements(std::string& out, const std::vector<Statement>& stmts, int depth) {
  for (const auto& s : stmts) print_statement(out, s, depth);
}

void print_bindings(std::string& out, std::string_view title, const std::vector<TypedBinding>& items) {
  if (items.empty()) return;
  out += fmt::format("{}:\n", title);
  for (const auto& b : items) out += fmt::format("  {} {} = {};\n", b.data_type, b.name, b.initial);
}

void print_state(std::string& out, const StateMachine& sm, const StateDef& s) {
  out += fmt::format("  {}state {}\n", s.name == sm.initial_state ? "initial " : "", s.name);
  bool finite = std::isfinite(s.statehold);
  if (finite || !s.entry_actions.empty()) {
    out += "    when entry() then\n";
    if (finite) out += fmt::format("      statehold({});\n", format_number(s.statehold));
    print_statements(out, s.entry_actions, 3);
    out += "    end;\n";
  }
  for (const auto& t : s.transforms) {
    out += fmt::format("    when {} then\n", t.condition);
    print_statements(out, t.actions, 3);
    if (t.target) out += fmt::format("      transform({});\n", *t.target);
    out += "    end;\n";
  }
  out += "  end;\n";
}

}  // namespace

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string print_section(const ModelUnit& unit, std::string_view section) {
  std::string out;
  if (section == "part") {
    if (unit.parts.empty()) return out;
    out += "part:\n";
    for (const auto& p : unit.parts) out += fmt::format("  {} {};\n", p.class_name, p.instance_name);
  } else if (section == "parameter") {
    print_bindings(out, "parameter", unit.parameters);
  } else if (section == "value") {
    print_bindings(out, "value", unit.values);
  } else if (section == "port") {
    if (unit.ports.empty()) return out;
    out += "port:\n";
    for (const auto& p : unit.ports) {
      out += "  ";
      if (p.direction) out += fmt::format("{} ", to_string(*p.direction));
      out += fmt::format("{} {}", p.port_type, p.name);
      if (p.initial) out += fmt::format(" = {}", *p.initial);
      out += ";\n";
    }
  } else if (section == "connection") {
    if (unit.connections.empty()) return out;
    out += "connection:\n";
    for (const auto& c : unit.connections)
      out += fmt::format("  connect({}, {});\n", c.from.str(), c.to.str());
  } else if (section == "state") {
    if (!unit.states || unit.states->states.empty()) return out;
    out += "state:\n";
    for (const auto& s : unit.states->states) print_state(out, *unit.states, s);
  } else if (section == "equation") {
    if (unit.equations.empty()) return out;
    out += "equation:\n";
    for (const auto& e : unit.equations) {
      if (e.derivative)
        out += fmt::format("  der({}) = {};\n", e.target, e.rhs);
      else
        out += fmt::format("  {} = {};\n", e.target, e.rhs);
    }
  }
  return out;
}

std::string print_unit_with_markers(const ModelUnit& unit,
                                    const std::map<std::string, std::string>& markers) {
  std::string out = fmt::format("{} {}", to_string(unit.kind), unit.name);
  if (unit.kind == UnitKind::Function && unit.body) {
    out += "(";
    for (std::size_t i = 0; i < unit.body->params.size(); ++i) {
      if (i) out += ", ";
      out += fmt::format("{} {}", unit.body->params[i].data_type, unit.body->params[i].name);
    }
    out += ")";
  }
  out += "\n";
  for (const auto& imp : unit.imports) out += fmt::format("  import {};\n", imp.name);

  static const std::vector<std::string_view> couple_order = {"part", "parameter", "port", "value",
                                                             "connection"};
  static const std::vector<std::string_view> discrete_order = {"parameter", "value", "port", "state"};
  static const std::vector<std::string_view> continuous_order = {"parameter", "value", "port",
                                                                 "equation"};
  const std::vector<std::string_view>* order = nullptr;
  switch (unit.kind) {
    case UnitKind::Couple: order = &couple_order; break;
    case UnitKind::Discrete: order = &discrete_order; break;
    case UnitKind::Continuous: order = &continuous_order; break;
    case UnitKind::Function: break;
  }
  if (order) {
    for (auto section : *order) {
      std::string text = print_section(unit, section);
      if (text.empty()) {
        auto it = markers.find(std::string(section));
        if (it != markers.end()) text = it->second + "\n";
      }
      out += text;
    }
  } else if (unit.body) {
    print_statements(out, unit.body->statements, 1);
  }
  out += "end;\n";
  return out;
}

std::string print_unit(const ModelUnit& unit) { return print_unit_with_markers(unit, {}); }

std::string print_units(const std::vector<ModelUnit>& units) {
  std::string out;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i) out += "\n";
    out += print_unit(units[i]);
  }
  return out;
}

}  // namespace xgen::model
