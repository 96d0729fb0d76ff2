#include "xgen/templ/template.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "xgen/model/names.hpp"
#include "xgen/model/parser.hpp"
#include "xgen/model/printer.hpp"

namespace xgen::templ {

using model::DiagCode;
using model::PortDirection;
using model::UnitKind;

std::string_view to_string(Hole hole) {
  switch (hole) {
    case Hole::Value: return "Value";
    case Hole::State: return "State";
    case Hole::Equation: return "Equation";
    case Hole::FunctionBody: return "FunctionBody";
  }
  return "";
}

std::string marker(Hole hole) { return fmt::format("/*HOLE:{}*/", to_string(hole)); }

std::string_view section_of(Hole hole) {
  switch (hole) {
    case Hole::Value: return "value";
    case Hole::State: return "state";
    case Hole::Equation: return "equation";
    case Hole::FunctionBody: return "";
  }
  return "";
}

std::string_view to_string(PortConvention convention) {
  return convention == PortConvention::PaperLiteral ? "paper-literal" : "dataflow";
}

PortConvention port_convention_from_string(std::string_view text) {
  if (text == "dataflow") return PortConvention::Dataflow;
  if (text == "paper-literal") return PortConvention::PaperLiteral;
  throw std::invalid_argument(fmt::format("unknown port convention '{}'", text));
}

namespace {

bool section_present(const model::ModelUnit& unit, Hole hole) {
  switch (hole) {
    case Hole::Value: return !unit.values.empty();
    case Hole::State: return unit.states.has_value();
    case Hole::Equation: return !unit.equations.empty();
    case Hole::FunctionBody: return unit.body && !unit.body->statements.empty();
  }
  return false;
}

}  // namespace

std::string TemplateInstance::print() const {
  std::map<std::string, std::string> markers;
  for (auto hole : holes)
    if (hole != Hole::FunctionBody) markers[std::string(section_of(hole))] = marker(hole);
  std::string text = model::print_unit_with_markers(filled, markers);
  if (holes.count(Hole::FunctionBody)) {
    auto end = text.rfind("end;");
    text.insert(end, "  " + marker(Hole::FunctionBody) + "\n");
  }
  return text;
}

StaticPortTypes::StaticPortTypes(std::map<std::string, std::string> table, std::string fallback)
    : table_(std::move(table)), fallback_(std::move(fallback)) {}

StaticPortTypes StaticPortTypes::from_json(std::string_view text) {
  auto doc = nlohmann::json::parse(text);
  std::map<std::string, std::string> table;
  std::string fallback = "Real";
  for (const auto& [key, value] : doc.items()) {
    auto type = value.get<std::string>();
    if (!model::is_known_type(type)) throw std::invalid_argument(fmt::format("unknown type '{}'", type));
    if (key == "*")
      fallback = type;
    else
      table[key] = type;
  }
  return StaticPortTypes(std::move(table), std::move(fallback));
}

std::string StaticPortTypes::reason(std::string_view part, std::string_view port) {
  auto qualified = fmt::format("{}.{}", part, port);
  if (auto it = table_.find(qualified); it != table_.end()) return it->second;
  // Normalized qualified match, so "Radar.target_range" serves instance "radar".
  auto wanted = model::normalize_name(part) + "." + model::normalize_name(port);
  for (const auto& [key, type] : table_) {
    auto dot = key.find('.');
    if (dot != std::string::npos &&
        model::normalize_name(key.substr(0, dot)) + "." + model::normalize_name(key.substr(dot + 1)) == wanted)
      return type;
  }
  if (auto it = table_.find(std::string(port)); it != table_.end()) return it->second;
  return fallback_;
}

TemplateInstance build_couple(const doc::ComponentNode& node,
                              const std::vector<model::Connection>& connections,
                              PortTypeReasoner* couple_port_types) {
  if (node.children.empty())
    throw TemplateError(DiagCode::UnknownPart, fmt::format("'{}' has no subsystems", node.name));
  TemplateInstance out;
  out.kind = UnitKind::Couple;
  auto& unit = out.filled;
  unit.kind = UnitKind::Couple;
  unit.name = model::to_class_name(node.name);

  std::map<std::string, std::string> instance_by_key;
  for (const auto& child : node.children) {
    auto cls = model::to_class_name(child.name);
    auto inst = model::to_instance_name(child.name);
    unit.imports.push_back({cls, {}});
    unit.parts.push_back({cls, inst, {}});
    instance_by_key[model::normalize_name(child.name)] = inst;
  }

  auto resolve = [&](const model::Endpoint& ep) -> model::Endpoint {
    if (ep.is_external()) {
      if (!unit.find_port(ep.port)) {
        model::PortDecl decl;
        decl.port_type = couple_port_types ? couple_port_types->reason(node.name, ep.port) : "Real";
        decl.name = ep.port;
        unit.ports.push_back(std::move(decl));
      }
      return ep;
    }
    auto it = instance_by_key.find(model::normalize_name(ep.part));
    if (it == instance_by_key.end())
      throw TemplateError(DiagCode::UnknownPart,
                          fmt::format("connection endpoint '{}' names no subsystem of '{}'", ep.str(),
                                      node.name));
    return {it->second, ep.port};
  };
  for (const auto& c : connections) unit.connections.push_back({resolve(c.from), resolve(c.to), {}});
  return out;
}

std::vector<PortSpec> extract_subsystem_ports(const std::vector<model::Connection>& connections,
                                              std::string_view part_name, PortTypeReasoner& types,
                                              PortConvention convention,
                                              std::vector<model::Diagnostic>* diagnostics) {
  const auto key = model::normalize_name(part_name);
  const auto first = convention == PortConvention::Dataflow ? PortDirection::Output : PortDirection::Input;
  const auto second = first == PortDirection::Output ? PortDirection::Input : PortDirection::Output;

  std::set<std::pair<std::string, PortDirection>> seen;
  std::vector<PortSpec> ports;
  auto add = [&](const model::Endpoint& ep, PortDirection dir) {
    if (ep.is_external() || model::normalize_name(ep.part) != key) return;
    if (!seen.insert({ep.port, dir}).second) return;
    ports.push_back({dir, types.reason(part_name, ep.port), ep.port});
  };
  for (const auto& c : connections) {
    add(c.from, first);
    add(c.to, second);
  }
  std::sort(ports.begin(), ports.end(), [](const PortSpec& a, const PortSpec& b) {
    return std::tie(a.name, a.direction) < std::tie(b.name, b.direction);
  });
  for (std::size_t i = 1; i < ports.size(); ++i) {
    if (ports[i].name != ports[i - 1].name || !diagnostics) continue;
    model::Diagnostic d;
    d.severity = model::Severity::Warning;
    d.code = DiagCode::DirectionMismatch;
    d.unit = std::string(part_name);
    d.message = fmt::format("port '{}' of '{}' is used as both input and output; emitted twice",
                            ports[i].name, part_name);
    diagnostics->push_back(std::move(d));
  }
  return ports;
}

TemplateInstance make_atomic_skeleton(const model::PartDecl& part, const std::vector<PortSpec>& ports,
                                      UnitKind kind) {
  if (kind != UnitKind::Discrete && kind != UnitKind::Continuous)
    throw std::invalid_argument("atomic skeletons are discrete or continuous");
  TemplateInstance out;
  out.kind = kind;
  out.filled.kind = kind;
  out.filled.name = part.class_name;
  for (const auto& p : ports) {
    model::PortDecl decl;
    decl.direction = p.direction;
    decl.port_type = p.port_type;
    decl.name = p.name;
    out.filled.ports.push_back(std::move(decl));
  }
  out.holes = {Hole::Value, kind == UnitKind::Discrete ? Hole::State : Hole::Equation};
  return out;
}

TemplateInstance make_function_skeleton(std::string_view name, std::size_t arity) {
  TemplateInstance out;
  out.kind = UnitKind::Function;
  out.filled.kind = UnitKind::Function;
  out.filled.name = std::string(name);
  out.filled.body.emplace();
  for (std::size_t i = 0; i < arity; ++i) out.filled.body->params.push_back({"Real", fmt::format("a{}", i + 1)});
  out.holes = {Hole::FunctionBody};
  return out;
}

TemplateInstance splice_hole(const TemplateInstance& instance, Hole hole, std::string_view text) {
  if (!instance.holes.count(hole))
    throw std::invalid_argument(fmt::format("template has no {} hole", to_string(hole)));
  std::string printed = instance.print();
  const auto mark = marker(hole);
  auto at = printed.find(mark);
  std::string body(text);
  if (!body.empty() && body.back() != '\n') body += '\n';
  // The marker occupies a whole line (indented for function bodies).
  auto line_begin = printed.rfind('\n', at) + 1;
  printed.replace(line_begin, at + mark.size() + 1 - line_begin, body);

  TemplateInstance out;
  out.kind = instance.kind;
  out.filled = model::parse_unit(printed, instance.filled.name + ".x");
  for (auto h : instance.holes)
    if (h != hole && !section_present(out.filled, h)) out.holes.insert(h);
  return out;
}

model::ModelUnit close_holes(const TemplateInstance& instance) { return instance.filled; }

}  // namespace xgen::templ
