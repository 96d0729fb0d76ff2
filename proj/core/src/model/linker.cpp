#include "xgen/model/linker.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "xgen/model/expr.hpp"
#include "xgen/model/walk.hpp"

namespace xgen::model {

const ModelUnit* LinkedModel::find(std::string_view name) const {
  auto it = std::find_if(units.begin(), units.end(),
                         [&](const ModelUnit& u) { return u.name == name; });
  return it == units.end() ? nullptr : &*it;
}

std::optional<PortDirection> LinkedModel::port_direction(const ModelUnit& unit,
                                                         std::string_view port) const {
  const PortDecl* decl = unit.find_port(port);
  if (decl == nullptr) return std::nullopt;
  if (decl->direction) return decl->direction;
  auto cit = couple_port_directions.find(unit.name);
  if (cit == couple_port_directions.end()) return std::nullopt;
  auto pit = cit->second.find(std::string(port));
  if (pit == cit->second.end()) return std::nullopt;
  return pit->second;
}

FunctionTable function_table(const std::vector<ModelUnit>& units) {
  FunctionTable table;
  for (const auto& u : units)
    if (u.kind == UnitKind::Function && u.body) table[u.name] = u.body->params.size();
  return table;
}

std::vector<std::string> called_functions(const ModelUnit& unit) {
  std::set<std::string> names;
  walk_unit(unit, [&](const ExprSite& site) {
    try {
      ExprSymbols syms;
      collect_symbols(parse_expression(site.text), syms);
      for (const auto& [callee, arities] : syms.calls)
        if (!is_builtin_function(callee)) names.insert(callee);
    } catch (const ExprError&) {
    }
  });
  return {names.begin(), names.end()};
}

std::vector<Diagnostic> check_unit_symbols(const ModelUnit& unit, const FunctionTable& functions,
                                           bool allow_unknown_calls) {
  std::vector<Diagnostic> diags;
  auto report = [&](DiagCode code, const SourceSpan& span, std::string_view section,
                    std::string msg) {
    diags.push_back(Diagnostic{Severity::Error, code, span, std::move(msg), std::string(section),
                               unit.name});
  };

  std::set<std::string, std::less<>> readable;
  std::set<std::string, std::less<>> assignable;
  std::set<std::string, std::less<>> states_vars;  // targets allowed under der()
  for (const auto& p : unit.parameters) readable.insert(p.name);
  for (const auto& v : unit.values) {
    readable.insert(v.name);
    assignable.insert(v.name);
    states_vars.insert(v.name);
  }
  for (const auto& p : unit.ports) {
    readable.insert(p.name);
    if (p.direction == PortDirection::Output) assignable.insert(p.name);
  }
  if (unit.body) {
    for (const auto& p : unit.body->params) readable.insert(p.name);
    walk_unit(unit, {}, [&](const AssignSite& a) {
      readable.insert(std::string(a.target));
      assignable.insert(std::string(a.target));
    });
  }

  walk_unit(
      unit,
      [&](const ExprSite& site) {
        Expr expr;
        try {
          expr = parse_expression(site.text);
        } catch (const ExprError& e) {
          report(DiagCode::UnexpectedToken, site.span, site.section, e.what());
          return;
        }
        ExprSymbols syms;
        collect_symbols(expr, syms);
        for (const auto& var : syms.variables) {
          if (!readable.count(var) && !is_builtin_variable(var))
            report(DiagCode::UnknownIdentifier, site.span, site.section,
                   fmt::format("unknown identifier '{}'", var));
        }
        for (const auto& [callee, arities] : syms.calls) {
          if (callee == "timeout" && site.role != ExprRole::Condition) {
            report(DiagCode::UnknownFunction, site.span, site.section,
                   "'timeout()' is only meaningful as a transform condition");
            continue;
          }
          std::optional<std::size_t> expected;
          if (is_builtin_function(callee)) {
            expected = builtin_arity(callee);
          } else if (auto it = functions.find(callee); it != functions.end()) {
            expected = it->second;
          } else if (!allow_unknown_calls) {
            report(DiagCode::UnknownFunction, site.span, site.section,
                   fmt::format("call to undefined function '{}'", callee));
            continue;
          }
          if (expected && (arities.size() != 1 || *arities.begin() != *expected)) {
            report(DiagCode::UnknownFunction, site.span, site.section,
                   fmt::format("'{}' expects {} argument(s)", callee, *expected));
          }
        }
      },
      [&](const AssignSite& a) {
        if (a.derivative) {
          if (!states_vars.count(a.target))
            report(DiagCode::UnknownIdentifier, a.span, a.section,
                   fmt::format("der() target '{}' is not a declared value", a.target));
        } else if (!assignable.count(a.target)) {
          report(DiagCode::UnknownIdentifier, a.span, a.section,
                 readable.count(a.target)
                     ? fmt::format("'{}' is not assignable (parameter or input port)", a.target)
                     : fmt::format("assignment to unknown identifier '{}'", a.target));
        }
      });
  return diags;
}

namespace {

class Linker {
 public:
  Linker(std::vector<ModelUnit> units, const LinkOptions& options)
      : units_(std::move(units)), options_(options) {}

  LinkResult run() {
    index_units();
    std::optional<std::size_t> top = find_top();
    infer_couple_directions();
    for (const auto& u : units_) {
      if (u.kind == UnitKind::Couple) check_couple(u);
    }
    auto functions = function_table(units_);
    for (const auto& u : units_) {
      auto d = check_unit_symbols(u, functions);
      diags_.insert(diags_.end(), d.begin(), d.end());
    }
    LinkResult result;
    if (top && !has_errors(diags_)) {
      LinkedModel model;
      model.top = *top;
      model.couple_port_directions = directions_;
      model.root.path = units_[*top].name;
      model.root.unit = *top;
      std::set<std::string> stack;
      if (build_tree(model.root, stack)) {
        model.units = std::move(units_);
        result.model = std::move(model);
      }
    } else if (top) {
      // still detect recursive composition for reporting
      InstanceNode scratch;
      scratch.path = units_[*top].name;
      scratch.unit = *top;
      std::set<std::string> stack;
      build_tree(scratch, stack);
    }
    result.diagnostics = std::move(diags_);
    if (has_errors(result.diagnostics)) result.model.reset();
    return result;
  }

 private:
  void error(DiagCode code, const SourceSpan& span, const std::string& unit, std::string msg) {
    diags_.push_back(Diagnostic{Severity::Error, code, span, std::move(msg), {}, unit});
  }

  void index_units() {
    for (std::size_t i = 0; i < units_.size(); ++i) {
      auto [it, inserted] = by_name_.emplace(units_[i].name, i);
      if (!inserted)
        error(DiagCode::DuplicateName, units_[i].span, units_[i].name,
              fmt::format("unit '{}' is defined more than once", units_[i].name));
    }
  }

  const ModelUnit* lookup(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? nullptr : &units_[it->second];
  }

  std::optional<std::size_t> find_top() {
    if (options_.top) {
      auto it = by_name_.find(*options_.top);
      if (it == by_name_.end() || units_[it->second].kind != UnitKind::Couple) {
        error(DiagCode::NoTopLevel, {}, *options_.top,
              fmt::format("designated top-level couple '{}' not found", *options_.top));
        return std::nullopt;
      }
      return it->second;
    }
    std::set<std::string> used;
    for (const auto& u : units_)
      for (const auto& p : u.parts) used.insert(p.class_name);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < units_.size(); ++i)
      if (units_[i].kind == UnitKind::Couple && !used.count(units_[i].name)) candidates.push_back(i);
    if (candidates.size() == 1) return candidates.front();
    error(DiagCode::NoTopLevel, {}, {},
          candidates.empty() ? "no top-level couple found"
                             : fmt::format("{} candidate top-level couples; designate one",
                                           candidates.size()));
    return std::nullopt;
  }

  void infer_couple_directions() {
    for (const auto& u : units_) {
      if (u.kind != UnitKind::Couple) continue;
      auto& dirs = directions_[u.name];
      for (const auto& p : u.ports)
        if (p.direction) dirs[p.name] = *p.direction;
      for (const auto& c : u.connections) {
        auto note = [&](const Endpoint& ep, PortDirection dir) {
          if (!ep.is_external() || u.find_port(ep.port) == nullptr) return;
          auto [it, inserted] = dirs.emplace(ep.port, dir);
          if (!inserted && it->second != dir)
            error(DiagCode::DirectionMismatch, c.span, u.name,
                  fmt::format("couple port '{}' is used both as input and output", ep.port));
        };
        note(c.from, PortDirection::Input);
        note(c.to, PortDirection::Output);
      }
    }
  }

  std::optional<PortDirection> direction_of(const ModelUnit& unit, const PortDecl& port) const {
    if (port.direction) return port.direction;
    auto cit = directions_.find(unit.name);
    if (cit == directions_.end()) return std::nullopt;
    auto pit = cit->second.find(port.name);
    if (pit == cit->second.end()) return std::nullopt;
    return pit->second;
  }

  struct Resolved {
    const ModelUnit* unit = nullptr;
    const PortDecl* port = nullptr;
  };

  std::optional<Resolved> resolve(const ModelUnit& couple, const Connection& c, const Endpoint& ep) {
    if (ep.is_external()) {
      const PortDecl* port = couple.find_port(ep.port);
      if (port == nullptr) {
        error(DiagCode::UnknownPort, c.span, couple.name,
              fmt::format("'{}' is not a port of couple '{}'", ep.port, couple.name));
        return std::nullopt;
      }
      return Resolved{&couple, port};
    }
    const PartDecl* part = couple.find_part(ep.part);
    if (part == nullptr) {
      error(DiagCode::UnknownPart, c.span, couple.name,
            fmt::format("'{}' is not a part of couple '{}'", ep.part, couple.name));
      return std::nullopt;
    }
    const ModelUnit* cls = lookup(part->class_name);
    if (cls == nullptr) return std::nullopt;  // reported by check_couple
    const PortDecl* port = cls->find_port(ep.port);
    if (port == nullptr) {
      error(DiagCode::UnknownPort, c.span, couple.name,
            fmt::format("'{}' has no port '{}' (class {})", ep.part, ep.port, cls->name));
      return std::nullopt;
    }
    return Resolved{cls, port};
  }

  void check_couple(const ModelUnit& couple) {
    for (const auto& part : couple.parts) {
      const ModelUnit* cls = lookup(part.class_name);
      if (cls == nullptr) {
        error(DiagCode::UnknownClass, part.span, couple.name,
              fmt::format("part '{}' refers to unknown class '{}'", part.instance_name,
                          part.class_name));
      } else if (cls->kind == UnitKind::Function) {
        error(DiagCode::UnknownClass, part.span, couple.name,
              fmt::format("part '{}' instantiates function '{}'", part.instance_name, cls->name));
      }
    }
    for (const auto& imp : couple.imports) {
      if (lookup(imp.name) == nullptr)
        error(DiagCode::UnknownClass, imp.span, couple.name,
              fmt::format("import of unknown class '{}'", imp.name));
    }
    for (const auto& c : couple.connections) {
      auto from = resolve(couple, c, c.from);
      auto to = resolve(couple, c, c.to);
      if (!from || !to) continue;
      // A source is a child output or the couple's own input; a sink is the reverse.
      auto src_dir = direction_of(*from->unit, *from->port);
      auto dst_dir = direction_of(*to->unit, *to->port);
      bool from_ok = !src_dir || *src_dir == (c.from.is_external() ? PortDirection::Input
                                                                   : PortDirection::Output);
      bool to_ok = !dst_dir || *dst_dir == (c.to.is_external() ? PortDirection::Output
                                                               : PortDirection::Input);
      if (!from_ok || !to_ok) {
        error(DiagCode::DirectionMismatch, c.span, couple.name,
              fmt::format("connect({}, {}) does not run from a source to a sink", c.from.str(),
                          c.to.str()));
      }
      if (from->port->port_type != to->port->port_type) {
        error(DiagCode::TypeMismatch, c.span, couple.name,
              fmt::format("connect({}, {}) joins {} to {}", c.from.str(), c.to.str(),
                          from->port->port_type, to->port->port_type));
      }
    }
  }

  bool build_tree(InstanceNode& node, std::set<std::string>& stack) {
    const ModelUnit& unit = units_[node.unit];
    if (!stack.insert(unit.name).second) {
      error(DiagCode::RecursiveComposition, unit.span, unit.name,
            fmt::format("couple '{}' contains itself", unit.name));
      return false;
    }
    bool ok = true;
    for (const auto& part : unit.parts) {
      auto it = by_name_.find(part.class_name);
      if (it == by_name_.end()) {
        ok = false;
        continue;
      }
      InstanceNode child;
      child.instance = part.instance_name;
      child.path = node.path + "." + part.instance_name;
      child.unit = it->second;
      if (units_[child.unit].kind == UnitKind::Couple) ok = build_tree(child, stack) && ok;
      node.children.push_back(std::move(child));
    }
    stack.erase(unit.name);
    return ok;
  }

  std::vector<ModelUnit> units_;
  LinkOptions options_;
  std::map<std::string, std::size_t> by_name_;
  std::map<std::string, std::map<std::string, PortDirection>> directions_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

LinkResult link_model_set(std::vector<ModelUnit> units, const LinkOptions& options) {
  return Linker(std::move(units), options).run();
}

}  // namespace xgen::model
