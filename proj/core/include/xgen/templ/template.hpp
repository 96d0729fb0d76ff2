#pragma once

#include <compare>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xgen/doc/composition.hpp"
#include "xgen/model/ast.hpp"
#include "xgen/model/diagnostics.hpp"

namespace xgen::templ {

enum class Hole { Value, State, Equation, FunctionBody };

std::string_view to_string(Hole hole);
/// `/*HOLE:Value*/` and friends.
std::string marker(Hole hole);
/// Section keyword a hole stands for ("value", "state", "equation"); empty
/// for FunctionBody.
std::string_view section_of(Hole hole);

/// A partially populated unit. Sections listed in `holes` are absent from
/// `filled` and print as hole markers.
struct TemplateInstance {
  model::UnitKind kind = model::UnitKind::Discrete;
  model::ModelUnit filled;
  std::set<Hole> holes;

  std::string print() const;

  friend bool operator==(const TemplateInstance&, const TemplateInstance&) = default;
};

struct PortSpec {
  model::PortDirection direction = model::PortDirection::Input;
  std::string port_type;
  std::string name;

  friend bool operator==(const PortSpec&, const PortSpec&) = default;
};

enum class PortConvention { Dataflow, PaperLiteral };

std::string_view to_string(PortConvention convention);
PortConvention port_convention_from_string(std::string_view text);  // throws invalid_argument

class PortTypeReasoner {
 public:
  virtual ~PortTypeReasoner() = default;
  virtual std::string reason(std::string_view part, std::string_view port) = 0;
};

/// Lookup table keyed by "part.port" or bare "port"; unknown pairs get the
/// fallback type.
class StaticPortTypes : public PortTypeReasoner {
 public:
  explicit StaticPortTypes(std::map<std::string, std::string> table = {}, std::string fallback = "Real");

  /// JSON object {"part.port": "Type", "port": "Type", "*": "Fallback"}.
  static StaticPortTypes from_json(std::string_view text);

  std::string reason(std::string_view part, std::string_view port) override;

 private:
  std::map<std::string, std::string> table_;
  std::string fallback_;
};

class TemplateError : public std::runtime_error {
 public:
  TemplateError(model::DiagCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  model::DiagCode code() const { return code_; }

 private:
  model::DiagCode code_;
};

/// Couple whose imports and parts are the node's children and whose
/// connection section is `connections` with endpoint names resolved to the
/// children's instance names. External endpoints become couple ports.
/// Throws TemplateError{UnknownPart} for endpoints naming no child.
TemplateInstance build_couple(const doc::ComponentNode& node,
                              const std::vector<model::Connection>& connections,
                              PortTypeReasoner* couple_port_types = nullptr);

/// Ports of `part_name` as seen from the connection list, deduplicated and
/// sorted by (name, direction). Under the dataflow convention a first-position
/// endpoint is an Output; paper-literal reverses this. A port seen in both
/// directions yields both specs and a warning in `diagnostics`.
std::vector<PortSpec> extract_subsystem_ports(const std::vector<model::Connection>& connections,
                                              std::string_view part_name, PortTypeReasoner& types,
                                              PortConvention convention = PortConvention::Dataflow,
                                              std::vector<model::Diagnostic>* diagnostics = nullptr);

/// Header and port section of an atomic unit named after the part's class.
TemplateInstance make_atomic_skeleton(const model::PartDecl& part, const std::vector<PortSpec>& ports,
                                      model::UnitKind kind);

/// Function header with `arity` Real parameters and an open body.
TemplateInstance make_function_skeleton(std::string_view name, std::size_t arity);

/// Replaces the hole's marker with `text` and re-parses. The hole closes, as
/// does every other hole whose section the text supplied. Throws ParseError.
TemplateInstance splice_hole(const TemplateInstance& instance, Hole hole, std::string_view text);

/// Remaining holes become empty sections.
model::ModelUnit close_holes(const TemplateInstance& instance);

}  // namespace xgen::templ
