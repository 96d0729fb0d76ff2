#include "xgen/model/parser.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include <fmt/format.h>

#include "xgen/model/lexer.hpp"

namespace xgen::model {

namespace {

constexpr std::string_view kSections[] = {"part",  "parameter", "port",    "value",
                                          "connection", "state", "equation"};

bool is_section_name(std::string_view s) {
  for (auto k : kSections)
    if (k == s) return true;
  return false;
}

bool section_permitted(UnitKind kind, std::string_view section) {
  switch (kind) {
    case UnitKind::Couple:
      return section == "part" || section == "parameter" || section == "port" ||
             section == "value" || section == "connection";
    case UnitKind::Discrete:
      return section == "parameter" || section == "port" || section == "value" ||
             section == "state";
    case UnitKind::Continuous:
      return section == "parameter" || section == "port" || section == "value" ||
             section == "equation";
    case UnitKind::Function:
      return false;
  }
  return false;
}

bool is_class_keyword(const Token& t) {
  return t.kind == TokenKind::Identifier && unit_kind_from_string(t.text).has_value();
}

// Unwinds to the nearest recovery point; the diagnostic is already recorded.
struct Recover {};

class Parser {
 public:
  Parser(std::string_view source, std::string_view file, bool strict)
      : toks_(tokenize(source)), file_(file), strict_(strict) {}

  ParseResult run() {
    ParseResult result;
    while (!at_end()) {
      if (!is_class_keyword(cur())) {
        try {
          fail(cur(), "a class keyword (couple, discrete, continuous, function)");
        } catch (const Recover&) {
          skip_to_class_keyword();
          continue;
        }
      }
      if (auto unit = parse_one()) result.units.push_back(std::move(*unit));
    }
    result.diagnostics = std::move(diags_);
    return result;
  }

 private:
  // ---- token helpers -------------------------------------------------------
  const Token& cur() const { return toks_[idx_]; }
  const Token& peek(std::size_t n = 1) const {
    return toks_[std::min(idx_ + n, toks_.size() - 1)];
  }
  bool at_end() const { return cur().kind == TokenKind::End; }
  const Token& advance() {
    const Token& t = toks_[idx_];
    if (!at_end()) ++idx_;
    return t;
  }
  bool accept(std::string_view text) {
    if (cur().is(text)) {
      advance();
      return true;
    }
    return false;
  }

  SourceSpan span_of(const Token& a, const Token& b) const {
    return SourceSpan{std::string(file_), a.begin, b.end};
  }
  SourceSpan span_from(std::size_t first) const {
    std::size_t last = idx_ > first ? idx_ - 1 : first;
    return span_of(toks_[first], toks_[last]);
  }

  static std::string describe(const Token& t) {
    if (t.kind == TokenKind::End) return "end of input";
    return fmt::format("'{}'", t.text);
  }

  void record(Diagnostic d) {
    d.section = section_;
    d.unit = unit_name_;
    if (strict_) throw ParseError(std::move(d));
    diags_.push_back(std::move(d));
  }

  void report(DiagCode code, SourceSpan span, std::string message) {
    record(Diagnostic{Severity::Error, code, std::move(span), std::move(message), {}, {}});
  }

  [[noreturn]] void fail(const Token& at, std::string_view expected) {
    DiagCode code = at.kind == TokenKind::End && in_unit_ ? DiagCode::MissingEnd
                                                          : DiagCode::UnexpectedToken;
    std::string msg = code == DiagCode::MissingEnd
                          ? fmt::format("unit '{}' is missing its closing 'end;'", unit_name_)
                          : fmt::format("expected {}, found {}", expected, describe(at));
    if (code != DiagCode::MissingEnd || !missing_end_reported_) {
      report(code, span_of(at, at), std::move(msg));
    }
    if (code == DiagCode::MissingEnd) missing_end_reported_ = true;
    throw Recover{};
  }

  [[noreturn]] void fail_expected(std::string_view expected) { fail(cur(), expected); }

  const Token& expect(std::string_view text) {
    if (!cur().is(text)) fail_expected(fmt::format("'{}'", text));
    return advance();
  }

  std::string expect_identifier(std::string_view what) {
    if (cur().kind != TokenKind::Identifier) fail_expected(what);
    return advance().text;
  }

  void skip_past_semicolon() {
    while (!at_end() && !cur().is(";")) advance();
    accept(";");
  }

  void skip_to_class_keyword() {
    while (!at_end() && !is_class_keyword(cur())) advance();
  }

  bool at_unit_end() const { return cur().is("end") && peek().is(";"); }
  bool at_section_start() const {
    return cur().kind == TokenKind::Identifier && peek().is(":");
  }

  // ---- units ---------------------------------------------------------------
  std::optional<ModelUnit> parse_one() {
    ModelUnit unit;
    std::size_t first = idx_;
    unit.kind = *unit_kind_from_string(advance().text);
    section_.clear();
    unit_name_.clear();
    try {
      unit.name = expect_identifier("a class name");
      unit_name_ = unit.name;
      if (unit.kind == UnitKind::Function) unit.body = FunctionBody{parse_params(), {}};
    } catch (const Recover&) {
      skip_to_class_keyword();
      return std::nullopt;
    }
    in_unit_ = true;
    missing_end_reported_ = false;
    try {
      parse_imports(unit);
      if (unit.kind == UnitKind::Function) {
        parse_statements(unit.body->statements, StmtContext::Function, /*until_end=*/true);
      } else {
        parse_sections(unit);
      }
      expect("end");
      expect(";");
    } catch (const Recover&) {
      // MissingEnd or a fault outside any recoverable item: keep what we have.
      if (!at_end()) skip_to_class_keyword();
    }
    in_unit_ = false;
    section_.clear();
    if (unit.states && unit.states->states.empty()) unit.states.reset();
    unit.span = span_from(first);
    validate(unit);
    return unit;
  }

  std::vector<FunctionParam> parse_params() {
    std::vector<FunctionParam> params;
    expect("(");
    if (!cur().is(")")) {
      do {
        FunctionParam p;
        p.data_type = expect_identifier("a parameter type");
        p.name = expect_identifier("a parameter name");
        params.push_back(std::move(p));
      } while (accept(","));
    }
    expect(")");
    return params;
  }

  void parse_imports(ModelUnit& unit) {
    while (cur().is("import")) {
      std::size_t first = idx_;
      try {
        advance();
        Import imp;
        imp.name = expect_identifier("an imported name");
        accept(";");  // the continuous template omits it
        imp.span = span_from(first);
        unit.imports.push_back(std::move(imp));
      } catch (const Recover&) {
        skip_past_semicolon();
      }
    }
  }

  void parse_sections(ModelUnit& unit) {
    std::set<std::string> seen;
    while (!at_end() && !at_unit_end()) {
      if (cur().is("import")) {
        // imports belong to the header
        section_.clear();
        try {
          fail_expected("a section keyword");
        } catch (const Recover&) {
          skip_past_semicolon();
          continue;
        }
      }
      if (!at_section_start()) {
        try {
          fail_expected("a section keyword followed by ':'");
        } catch (const Recover&) {
          skip_past_semicolon();
          continue;
        }
      }
      const Token& name_tok = advance();
      advance();  // ':'
      std::string name = name_tok.text;
      section_ = name;
      bool skip_items = false;
      if (!is_section_name(name)) {
        report(DiagCode::UnknownSection, span_of(name_tok, name_tok),
               fmt::format("unknown section '{}:'", name));
        skip_items = true;
      } else if (!section_permitted(unit.kind, name)) {
        report(DiagCode::SectionNotPermitted, span_of(name_tok, name_tok),
               fmt::format("section '{}:' is not permitted in a {} class", name,
                           to_string(unit.kind)));
        skip_items = true;
      } else if (!seen.insert(name).second) {
        report(DiagCode::DuplicateSection, span_of(name_tok, name_tok),
               fmt::format("section '{}:' appears more than once", name));
      }
      if (skip_items) {
        while (!at_end() && !at_unit_end() && !at_section_start()) skip_past_semicolon();
        continue;
      }
      if (name == "state") {
        parse_state_section(unit);
      } else {
        while (!at_end() && !at_unit_end() && !at_section_start()) {
          std::size_t first = idx_;
          try {
            parse_item(unit, name);
          } catch (const Recover&) {
            if (idx_ == first) advance();
            skip_past_semicolon();
          }
        }
      }
    }
    section_.clear();
  }

  void parse_item(ModelUnit& unit, std::string_view section) {
    std::size_t first = idx_;
    if (section == "parameter" || section == "value") {
      TypedBinding b;
      b.data_type = expect_identifier("a data type");
      b.name = expect_identifier("a name");
      expect("=");
      b.initial = parse_literal();
      expect(";");
      b.span = span_from(first);
      (section == "parameter" ? unit.parameters : unit.values).push_back(std::move(b));
    } else if (section == "port") {
      PortDecl p;
      if (cur().is("input") || cur().is("output")) {
        p.direction = advance().text == "input" ? PortDirection::Input : PortDirection::Output;
      } else if (unit.kind != UnitKind::Couple) {
        fail_expected("'input' or 'output'");
      }
      p.port_type = expect_identifier("a port type");
      p.name = expect_identifier("a port name");
      if (accept("=")) p.initial = parse_literal();
      expect(";");
      p.span = span_from(first);
      unit.ports.push_back(std::move(p));
    } else if (section == "part") {
      PartDecl p;
      p.class_name = expect_identifier("a class name");
      p.instance_name = expect_identifier("an instance name");
      expect(";");
      p.span = span_from(first);
      unit.parts.push_back(std::move(p));
    } else if (section == "connection") {
      Connection c;
      expect("connect");
      expect("(");
      c.from = parse_endpoint();
      expect(",");
      c.to = parse_endpoint();
      expect(")");
      expect(";");
      c.span = span_from(first);
      unit.connections.push_back(std::move(c));
    } else if (section == "equation") {
      Equation e;
      if (cur().is("der") && peek().is("(")) {
        advance();
        advance();
        e.derivative = true;
        e.target = expect_identifier("a state variable");
        expect(")");
      } else {
        e.target = expect_identifier("an equation target");
      }
      expect("=");
      e.rhs = parse_expression_until(";");
      expect(";");
      e.span = span_from(first);
      unit.equations.push_back(std::move(e));
    }
  }

  Endpoint parse_endpoint() {
    Endpoint ep;
    std::string first = expect_identifier("a part or port name");
    if (accept(".")) {
      ep.part = std::move(first);
      ep.port = expect_identifier("a port name");
    } else {
      ep.port = std::move(first);
    }
    return ep;
  }

  std::string parse_literal() {
    std::string text;
    if (cur().is("-") || cur().is("+")) {
      text = advance().text;
      if (cur().kind != TokenKind::Number) fail_expected("a number");
    }
    const Token& t = cur();
    if (t.kind == TokenKind::Number || t.kind == TokenKind::String ||
        t.is("true") || t.is("false")) {
      text += advance().text;
      return text;
    }
    fail_expected("a literal");
  }

  /// Collects tokens up to (not including) `stop` at paren depth zero.
  std::string parse_expression_until(std::string_view stop) {
    std::vector<Token> toks;
    const Token& first = cur();
    int depth = 0;
    while (!at_end()) {
      const Token& t = cur();
      if (depth == 0 && t.is(stop)) break;
      if (t.is(";") && stop != ";") break;
      if (t.kind == TokenKind::Invalid || t.is(":") || t.is(".") || t.is("=") ||
          t.is("[") || t.is("]")) {
        fail(t, "an expression token");
      }
      if (t.is("(")) ++depth;
      if (t.is(")")) {
        if (--depth < 0) break;
      }
      toks.push_back(advance());
    }
    if (depth != 0) {
      report(DiagCode::UnbalancedExpression, span_of(first, cur()),
             "unbalanced parentheses in expression");
      throw Recover{};
    }
    if (toks.empty()) fail_expected("an expression");
    return render_tokens(toks);
  }

  // ---- discrete state section ---------------------------------------------
  void parse_state_section(ModelUnit& unit) {
    if (!unit.states) unit.states = StateMachine{};
    while (!at_end() && !at_unit_end() && !at_section_start()) {
      std::size_t first = idx_;
      try {
        parse_state(*unit.states);
      } catch (const Recover&) {
        if (idx_ == first) advance();
        skip_past_semicolon();
      }
    }
  }

  void parse_state(StateMachine& sm) {
    std::size_t first = idx_;
    bool initial = accept("initial");
    expect("state");
    StateDef def;
    def.name = expect_identifier("a state name");
    def.statehold = std::numeric_limits<double>::infinity();
    if (initial) {
      if (!sm.initial_state.empty()) {
        report(DiagCode::DuplicateName, span_of(toks_[first], cur()),
               fmt::format("second initial state '{}'", def.name));
      } else {
        sm.initial_state = def.name;
      }
    }
    // Items are recovered individually so a bad `when` block does not lose
    // the whole state.
    while (!at_end() && !(cur().is("end") && peek().is(";"))) {
      std::size_t item_first = idx_;
      try {
        parse_when_block(def);
      } catch (const Recover&) {
        if (idx_ == item_first) advance();
        skip_past_semicolon();
        if (at_section_start() || at_unit_end() || cur().is("state") || cur().is("initial")) break;
      }
    }
    expect("end");
    expect(";");
    def.span = span_from(first);
    sm.states.push_back(std::move(def));
  }

  void parse_when_block(StateDef& def) {
    std::size_t first = idx_;
    expect("when");
    if (cur().is("entry") && peek().is("(") && peek(2).is(")") && peek(3).is("then")) {
      idx_ += 4;
      parse_statements(def.entry_actions, StmtContext::Entry, true, &def);
      expect("end");
      expect(";");
      return;
    }
    Transform tr;
    tr.condition = parse_expression_until("then");
    expect("then");
    parse_statements(tr.actions, StmtContext::Transform, true, nullptr, &tr);
    expect("end");
    expect(";");
    tr.span = span_from(first);
    def.transforms.push_back(std::move(tr));
  }

  // ---- statements ------------------------------------------------------------
  enum class StmtContext { Entry, Transform, Function, Nested };

  void parse_statements(std::vector<Statement>& out, StmtContext ctx, bool until_end,
                        StateDef* state = nullptr, Transform* transform = nullptr) {
    (void)until_end;
    while (!at_end() && !cur().is("end") && !cur().is("else")) {
      std::size_t first = idx_;
      try {
        if (ctx == StmtContext::Entry && cur().is("statehold")) {
          parse_statehold(*state);
          continue;
        }
        if (ctx == StmtContext::Transform && cur().is("transform")) {
          advance();
          expect("(");
          std::string target = expect_identifier("a target state");
          expect(")");
          expect(";");
          if (!cur().is("end")) {
            report(DiagCode::UnexpectedToken, span_from(first),
                   "'transform(...)' must be the last statement of a when block");
          }
          transform->target = std::move(target);
          continue;
        }
        out.push_back(parse_statement(ctx));
      } catch (const Recover&) {
        if (idx_ == first) advance();
        skip_past_semicolon();
      }
    }
  }

  void parse_statehold(StateDef& def) {
    std::size_t first = idx_;
    advance();
    expect("(");
    double value = 0;
    if (cur().is("inf")) {
      advance();
      value = std::numeric_limits<double>::infinity();
    } else if (cur().kind == TokenKind::Number) {
      const std::string& text = advance().text;
      std::from_chars(text.data(), text.data() + text.size(), value);
    } else {
      fail_expected("a nonnegative duration or 'inf'");
    }
    expect(")");
    expect(";");
    if (value < 0) {
      report(DiagCode::BadLiteral, span_from(first), "statehold duration must be >= 0");
    }
    def.statehold = value;
  }

  Statement parse_statement(StmtContext ctx) {
    std::size_t first = idx_;
    Statement stmt;
    if (cur().is("if")) {
      advance();
      IfStmt branch;
      branch.condition = parse_expression_until("then");
      expect("then");
      StmtContext inner = ctx == StmtContext::Function ? ctx : StmtContext::Nested;
      parse_statements(branch.then_body, inner, true);
      if (accept("else")) parse_statements(branch.else_body, inner, true);
      expect("end");
      expect(";");
      stmt.node = std::move(branch);
    } else if (cur().is("return")) {
      if (ctx != StmtContext::Function) fail_expected("an assignment");
      advance();
      stmt.node = ReturnStmt{parse_expression_until(";")};
      expect(";");
    } else {
      AssignStmt assign;
      assign.target = expect_identifier("a statement");
      expect("=");
      assign.expr = parse_expression_until(";");
      expect(";");
      stmt.node = std::move(assign);
    }
    stmt.span = span_from(first);
    return stmt;
  }

  // ---- structural validation ----------------------------------------------
  void validate(const ModelUnit& unit) {
    auto check_binding = [&](const TypedBinding& b, std::string_view sec) {
      section_ = sec;
      if (!is_known_type(b.data_type)) {
        report(DiagCode::UnknownType, b.span, fmt::format("unknown data type '{}'", b.data_type));
      } else if (!literal_matches_type(b.data_type, b.initial)) {
        report(DiagCode::BadLiteral, b.span,
               fmt::format("'{}' is not a {} literal", b.initial, b.data_type));
      }
    };
    std::set<std::string> names;
    auto check_unique = [&](const std::string& name, const SourceSpan& span) {
      if (!names.insert(name).second)
        report(DiagCode::DuplicateName, span, fmt::format("'{}' is declared twice", name));
    };
    for (const auto& b : unit.parameters) {
      check_binding(b, "parameter");
      check_unique(b.name, b.span);
    }
    for (const auto& b : unit.values) {
      check_binding(b, "value");
      check_unique(b.name, b.span);
    }
    section_ = "port";
    for (const auto& p : unit.ports) {
      if (!is_known_type(p.port_type)) {
        report(DiagCode::UnknownType, p.span, fmt::format("unknown port type '{}'", p.port_type));
      } else if (p.initial && !literal_matches_type(p.port_type, *p.initial)) {
        report(DiagCode::BadLiteral, p.span,
               fmt::format("'{}' is not a {} literal", *p.initial, p.port_type));
      }
      check_unique(p.name, p.span);
    }
    section_ = "part";
    std::set<std::string> instances;
    for (const auto& p : unit.parts) {
      if (!instances.insert(p.instance_name).second)
        report(DiagCode::DuplicateName, p.span,
               fmt::format("part instance '{}' is declared twice", p.instance_name));
      if (!unit.imports_name(p.class_name))
        report(DiagCode::PartNotImported, p.span,
               fmt::format("part class '{}' is not imported", p.class_name));
    }
    if (unit.states) {
      section_ = "state";
      const auto& sm = *unit.states;
      std::set<std::string> state_names;
      for (const auto& s : sm.states) {
        if (!state_names.insert(s.name).second)
          report(DiagCode::DuplicateName, s.span, fmt::format("state '{}' is declared twice", s.name));
      }
      if (!sm.states.empty() && sm.initial_state.empty()) {
        report(DiagCode::MissingInitialState, sm.states.front().span,
               "state section has no 'initial state'");
      }
      for (const auto& s : sm.states) {
        for (const auto& t : s.transforms) {
          if (t.target && !state_names.count(*t.target))
            report(DiagCode::UnknownState, t.span,
                   fmt::format("transform target '{}' is not a state", *t.target));
        }
      }
    }
    section_.clear();
  }

  std::vector<Token> toks_;
  std::size_t idx_ = 0;
  std::string_view file_;
  bool strict_;
  bool in_unit_ = false;
  bool missing_end_reported_ = false;
  std::string section_;
  std::string unit_name_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<ModelUnit> parse_units(std::string_view source, std::string_view file) {
  return Parser(source, file, /*strict=*/true).run().units;
}

ModelUnit parse_unit(std::string_view source, std::string_view file) {
  auto units = parse_units(source, file);
  if (units.size() != 1) {
    Diagnostic d;
    d.code = DiagCode::UnexpectedToken;
    d.span.file = std::string(file);
    d.message = fmt::format("expected exactly one unit, found {}", units.size());
    throw ParseError(std::move(d));
  }
  return std::move(units.front());
}

ParseResult parse_units_recovering(std::string_view source, std::string_view file) {
  return Parser(source, file, /*strict=*/false).run();
}

}  // namespace xgen::model
