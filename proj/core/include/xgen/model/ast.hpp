#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xgen/model/source_span.hpp"

namespace xgen::model {

enum class UnitKind { Couple, Discrete, Continuous, Function };

std::string_view to_string(UnitKind kind);
std::optional<UnitKind> unit_kind_from_string(std::string_view text);

enum class PortDirection { Input, Output };

std::string_view to_string(PortDirection dir);

struct TypedBinding {
  std::string data_type;
  std::string name;
  std::string initial;
  SourceSpan span;

  friend bool operator==(const TypedBinding&, const TypedBinding&) = default;
};

struct PortDecl {
  // Couple ports carry no direction marker; it is inferred while linking.
  std::optional<PortDirection> direction;
  std::string port_type;
  std::string name;
  std::optional<std::string> initial;
  SourceSpan span;

  friend bool operator==(const PortDecl&, const PortDecl&) = default;
};

struct PartDecl {
  std::string class_name;
  std::string instance_name;
  SourceSpan span;

  friend bool operator==(const PartDecl&, const PartDecl&) = default;
};

/// `part.port`, or a bare `port` (empty part) naming the enclosing couple's
/// own port.
struct Endpoint {
  std::string part;
  std::string port;

  bool is_external() const noexcept { return part.empty(); }
  std::string str() const { return part.empty() ? port : part + "." + port; }

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

struct Connection {
  Endpoint from;
  Endpoint to;
  SourceSpan span;

  friend bool operator==(const Connection&, const Connection&) = default;
};

struct Statement;

struct AssignStmt {
  std::string target;
  std::string expr;

  friend bool operator==(const AssignStmt&, const AssignStmt&) = default;
};

struct IfStmt {
  std::string condition;
  std::vector<Statement> then_body;
  std::vector<Statement> else_body;

  friend bool operator==(const IfStmt&, const IfStmt&);
};

struct ReturnStmt {
  std::string expr;

  friend bool operator==(const ReturnStmt&, const ReturnStmt&) = default;
};

struct Statement {
  std::variant<AssignStmt, IfStmt, ReturnStmt> node;
  SourceSpan span;

  friend bool operator==(const Statement&, const Statement&) = default;
};

inline bool operator==(const IfStmt& a, const IfStmt& b) {
  return a.condition == b.condition && a.then_body == b.then_body &&
         a.else_body == b.else_body;
}

/// Condition text that marks a transform as internal (fires on time-advance
/// expiry rather than on input arrival).
inline constexpr std::string_view kTimeoutCondition = "timeout()";

struct Transform {
  std::string condition;
  std::vector<Statement> actions;
  // Absent target: run actions, keep state and its clock.
  std::optional<std::string> target;
  SourceSpan span;

  bool is_internal() const { return condition == kTimeoutCondition; }

  friend bool operator==(const Transform&, const Transform&) = default;
};

struct StateDef {
  std::string name;
  double statehold = 0.0;  // +inf when the state is passive
  std::vector<Statement> entry_actions;
  std::vector<Transform> transforms;
  SourceSpan span;

  friend bool operator==(const StateDef&, const StateDef&) = default;
};

struct StateMachine {
  std::string initial_state;
  std::vector<StateDef> states;

  const StateDef* find(std::string_view name) const;

  friend bool operator==(const StateMachine&, const StateMachine&) = default;
};

struct Equation {
  bool derivative = false;  // `der(target) = rhs`
  std::string target;
  std::string rhs;
  SourceSpan span;

  friend bool operator==(const Equation&, const Equation&) = default;
};

struct FunctionParam {
  std::string data_type;
  std::string name;

  friend bool operator==(const FunctionParam&, const FunctionParam&) = default;
};

struct FunctionBody {
  std::vector<FunctionParam> params;
  std::vector<Statement> statements;

  friend bool operator==(const FunctionBody&, const FunctionBody&) = default;
};

struct Import {
  std::string name;
  SourceSpan span;

  friend bool operator==(const Import&, const Import&) = default;
};

struct ModelUnit {
  UnitKind kind = UnitKind::Discrete;
  std::string name;
  std::vector<Import> imports;
  std::vector<TypedBinding> parameters;
  std::vector<TypedBinding> values;
  std::vector<PortDecl> ports;
  std::vector<PartDecl> parts;              // couple only
  std::vector<Connection> connections;      // couple only
  std::optional<StateMachine> states;       // discrete only
  std::vector<Equation> equations;          // continuous only
  std::optional<FunctionBody> body;         // function only
  SourceSpan span;

  const PortDecl* find_port(std::string_view port) const;
  const PartDecl* find_part(std::string_view instance) const;
  bool imports_name(std::string_view name) const;

  friend bool operator==(const ModelUnit&, const ModelUnit&) = default;
};

/// Copy with every span reset, for structural comparison.
ModelUnit strip_spans(ModelUnit unit);

bool is_identifier(std::string_view text);

/// Registered data types usable in bindings and ports.
bool is_known_type(std::string_view type);
const std::vector<std::string>& known_types();
bool literal_matches_type(std::string_view type, std::string_view literal);

}  // namespace xgen::model
