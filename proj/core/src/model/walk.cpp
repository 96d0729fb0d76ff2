#include "xgen/model/walk.hpp"

namespace xgen::model {

namespace {

struct Walker {
  const std::function<void(const ExprSite&)>& on_expr;
  const std::function<void(const AssignSite&)>& on_assign;
  std::string_view section;

  void expr(std::string_view text, ExprRole role, const SourceSpan& span) const {
    if (on_expr) on_expr(ExprSite{text, role, span, section});
  }
  void assign(std::string_view target, bool der, const SourceSpan& span) const {
    if (on_assign) on_assign(AssignSite{target, der, span, section});
  }

  void statements(const std::vector<Statement>& stmts) const {
    for (const auto& s : stmts) {
      if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
        assign(a->target, false, s.span);
        expr(a->expr, ExprRole::Value, s.span);
      } else if (const auto* r = std::get_if<ReturnStmt>(&s.node)) {
        expr(r->expr, ExprRole::Return, s.span);
      } else if (const auto* b = std::get_if<IfStmt>(&s.node)) {
        expr(b->condition, ExprRole::Condition, s.span);
        statements(b->then_body);
        statements(b->else_body);
      }
    }
  }
};

}  // namespace

void walk_unit(const ModelUnit& unit, const std::function<void(const ExprSite&)>& on_expr,
               const std::function<void(const AssignSite&)>& on_assign) {
  if (unit.states) {
    Walker w{on_expr, on_assign, "state"};
    for (const auto& s : unit.states->states) {
      w.statements(s.entry_actions);
      for (const auto& t : s.transforms) {
        w.expr(t.condition, ExprRole::Condition, t.span);
        w.statements(t.actions);
      }
    }
  }
  if (!unit.equations.empty()) {
    Walker w{on_expr, on_assign, "equation"};
    for (const auto& e : unit.equations) {
      w.assign(e.target, e.derivative, e.span);
      w.expr(e.rhs, ExprRole::Value, e.span);
    }
  }
  if (unit.body) {
    Walker w{on_expr, on_assign, "function"};
    w.statements(unit.body->statements);
  }
}

}  // namespace xgen::model
