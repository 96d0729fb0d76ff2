#include "xgen/eval/consistency.hpp"

#include <set>

#include <fmt/format.h>

#include "xgen/model/expr.hpp"
#include "xgen/model/names.hpp"
#include "xgen/model/walk.hpp"

namespace xgen::eval {

using model::Connection;
using model::Endpoint;
using model::ModelUnit;
using model::PortDecl;
using model::PortDirection;
using model::UnitKind;

namespace {

void tally(ConsistencyTally& t, UnitConsistency& out, bool ok, std::string issue) {
  if (ok) {
    ++t.ce;
  } else {
    ++t.ie;
    out.issues.push_back(std::move(issue));
  }
}

class Checker {
 public:
  Checker(const std::vector<ModelUnit>& units, const std::map<std::string, std::string>& slot_of)
      : units_(units) {
    for (const auto& u : units_) by_name_.emplace(model::normalize_name(u.name), &u);
    for (const auto& [unit, slot] : slot_of) {
      auto it = by_name_.find(model::normalize_name(unit));
      if (it != by_name_.end()) by_slot_.emplace(model::normalize_name(slot), it->second);
    }
  }

  ConsistencyReport run() {
    ConsistencyReport report;
    for (const auto& u : units_) report[u.name];
    for (const auto& u : units_)
      if (u.kind == UnitKind::Couple) check_couple(u, report[u.name]);
    for (const auto& u : units_) {
      auto& out = report[u.name];
      check_name(u, out);
      if (u.kind != UnitKind::Couple) {
        check_imports(u, out);
        if (u.kind != UnitKind::Function) check_ports(u, out);
        check_calls(u, out);
      }
    }
    return report;
  }

 private:
  struct Usage {
    const ModelUnit* parent;
    const model::PartDecl* part;
  };

  const ModelUnit* resolve(std::string_view class_name) const {
    auto key = model::normalize_name(class_name);
    if (auto it = by_name_.find(key); it != by_name_.end()) return it->second;
    if (auto it = by_slot_.find(key); it != by_slot_.end()) return it->second;
    return nullptr;
  }

  /// The port an endpoint names, or null.
  const PortDecl* endpoint_port(const ModelUnit& couple, const Endpoint& ep) const {
    if (ep.is_external()) return couple.find_port(ep.port);
    const auto* part = couple.find_part(ep.part);
    if (!part) return nullptr;
    const auto* cls = resolve(part->class_name);
    return cls ? cls->find_port(ep.port) : nullptr;
  }

  /// Empty when the endpoint agrees with its role, else the reason.
  std::string endpoint_fault(const ModelUnit& couple, const Connection& c, bool source) const {
    const auto& ep = source ? c.from : c.to;
    const auto* port = endpoint_port(couple, ep);
    if (!port) return fmt::format("endpoint {} does not resolve", ep.str());
    // External endpoints feed the inside: a couple input is a source.
    auto expected = source != ep.is_external() ? PortDirection::Output : PortDirection::Input;
    if (port->direction && *port->direction != expected)
      return fmt::format("endpoint {} is an {} port", ep.str(), model::to_string(*port->direction));
    const auto* other = endpoint_port(couple, source ? c.to : c.from);
    if (other && model::normalize_name(other->port_type) != model::normalize_name(port->port_type))
      return fmt::format("endpoint {} has type {} but is connected to {}", ep.str(), port->port_type,
                         other->port_type);
    return {};
  }

  void check_couple(const ModelUnit& couple, UnitConsistency& out) {
    for (const auto& imp : couple.imports)
      tally(out.header, out, resolve(imp.name) != nullptr, fmt::format("import {} names no unit", imp.name));
    for (const auto& part : couple.parts)
      if (const auto* cls = resolve(part.class_name)) usages_[cls].push_back({&couple, &part});
    for (const auto& c : couple.connections) {
      for (bool source : {true, false}) {
        auto fault = endpoint_fault(couple, c, source);
        tally(out.port, out, fault.empty(), fault);
      }
    }
  }

  void check_name(const ModelUnit& unit, UnitConsistency& out) {
    if (unit.kind == UnitKind::Function) return;
    auto it = usages_.find(&unit);
    if (it == usages_.end()) {
      // The top-level couple has no parent to agree with.
      if (unit.kind != UnitKind::Couple) tally(out.header, out, false, fmt::format("no part uses {}", unit.name));
      return;
    }
    const auto key = model::normalize_name(unit.name);
    std::string mismatch;
    for (const auto& use : it->second)
      if (model::normalize_name(use.part->class_name) != key)
        mismatch = fmt::format("{} declares part {} as {}", use.parent->name, use.part->instance_name,
                               use.part->class_name);
    tally(out.header, out, mismatch.empty(), mismatch);
  }

  void check_imports(const ModelUnit& unit, UnitConsistency& out) {
    for (const auto& imp : unit.imports)
      tally(out.header, out, resolve(imp.name) != nullptr, fmt::format("import {} names no unit", imp.name));
  }

  void check_ports(const ModelUnit& unit, UnitConsistency& out) {
    auto it = usages_.find(&unit);
    static const std::vector<Usage> none;
    const auto& uses = it == usages_.end() ? none : it->second;
    for (const auto& port : unit.ports) {
      std::size_t seen = 0;
      std::string fault;
      for (const auto& use : uses) {
        for (const auto& c : use.parent->connections) {
          for (bool source : {true, false}) {
            const auto& ep = source ? c.from : c.to;
            if (ep.is_external() || ep.part != use.part->instance_name || ep.port != port.name) continue;
            ++seen;
            if (auto f = endpoint_fault(*use.parent, c, source); !f.empty()) fault = f;
          }
        }
      }
      if (seen == 0) fault = fmt::format("port {} is not connected", port.name);
      tally(out.definition, out, fault.empty(), fault);
    }
    for (const auto& use : uses) {
      for (const auto& c : use.parent->connections) {
        for (const auto* ep : {&c.from, &c.to}) {
          if (ep->is_external() || ep->part != use.part->instance_name || unit.find_port(ep->port)) continue;
          tally(out.definition, out, false,
                fmt::format("{} connects {} which {} does not declare", use.parent->name, ep->str(), unit.name));
        }
      }
    }
  }

  void check_calls(const ModelUnit& unit, UnitConsistency& out) {
    model::ExprSymbols syms;
    model::walk_unit(unit, [&](const model::ExprSite& site) {
      try {
        model::collect_symbols(model::parse_expression(site.text), syms);
      } catch (const model::ExprError&) {
        // counted as a syntax error elsewhere
      }
    });
    for (const auto& [callee, arities] : syms.calls) {
      if (model::is_builtin_function(callee)) continue;
      const auto* fn = resolve(callee);
      if (!fn || fn->kind != UnitKind::Function || !fn->body) {
        tally(out.definition, out, false, fmt::format("{} calls undefined function {}", unit.name, callee));
        continue;
      }
      bool arity_ok = arities.size() == 1 && *arities.begin() == fn->body->params.size();
      tally(out.definition, out, arity_ok,
            fmt::format("{} calls {} with the wrong number of arguments", unit.name, callee));
    }
  }

  const std::vector<ModelUnit>& units_;
  std::map<std::string, const ModelUnit*> by_name_;
  std::map<std::string, const ModelUnit*> by_slot_;
  std::map<const ModelUnit*, std::vector<Usage>> usages_;
};

}  // namespace

ConsistencyReport consistency_check(const std::vector<ModelUnit>& units,
                                    const std::map<std::string, std::string>& slot_of) {
  return Checker(units, slot_of).run();
}

}  // namespace xgen::eval
