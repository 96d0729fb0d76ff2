#include "xgen/sim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "xgen/model/printer.hpp"

namespace xgen::sim {

using model::ModelUnit;
using model::PortDirection;
using model::UnitKind;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool uses_timeout(ExecContext& ctx, const std::string& condition) {
  model::ExprSymbols symbols;
  model::collect_symbols(ctx.compile(condition), symbols);
  return symbols.calls.count("timeout") > 0;
}

/// Collects output-port writes during one transition so each written port
/// emits once, with its final value, in declaration order.
class Transition {
 public:
  Transition(AtomicRuntime& rt, double now) : rt_(rt), now_(now) {}

  Scope scope(bool timeout) const { return Scope{{&rt_.value_env, &rt_.ports}, now_, timeout}; }

  void assign(const std::string& target, Value value) {
    if (auto it = rt_.ports.find(target); it != rt_.ports.end()) {
      it->second = std::move(value);
      written_.insert(target);
      return;
    }
    if (auto it = rt_.value_env.find(target); it != rt_.value_env.end()) {
      it->second = std::move(value);
      return;
    }
    throw EvalError(fmt::format("assignment to undeclared '{}'", target));
  }

  void run(const std::vector<model::Statement>& statements, bool timeout) {
    rt_.context->run(statements, scope(timeout),
                     [this](const std::string& t, Value v) { assign(t, std::move(v)); });
  }

  void enter(const std::string& state) {
    const auto* def = rt_.unit->states->find(state);
    if (!def)
      throw UnknownTransformTarget(now_, rt_.path, fmt::format("transform to unknown state '{}'", state));
    rt_.current_state = state;
    rt_.time_of_last_event = now_;
    rt_.time_advance = def->statehold;
    run(def->entry_actions, false);
  }

  std::vector<PortEvent> outputs() const {
    std::vector<PortEvent> out;
    for (const auto& port : rt_.unit->ports)
      if (port.direction == PortDirection::Output && written_.count(port.name))
        out.push_back({now_, rt_.path, port.name, rt_.ports.at(port.name)});
    return out;
  }

 private:
  AtomicRuntime& rt_;
  double now_;
  std::set<std::string> written_;
};

template <typename F>
auto guarded(double now, const std::string& path, F&& body) {
  try {
    return body();
  } catch (const EvalError& e) {
    throw RuntimeFault(now, path, e.what());
  }
}

const model::StateDef& current_state(const AtomicRuntime& rt, double now) {
  const auto* def = rt.unit->states->find(rt.current_state);
  if (!def)
    throw UnknownTransformTarget(now, rt.path, fmt::format("unknown current state '{}'", rt.current_state));
  return *def;
}

}  // namespace

std::string_view to_string(Integrator integrator) {
  return integrator == Integrator::RK4 ? "rk4" : "euler";
}

std::optional<Integrator> integrator_from_string(std::string_view text) {
  if (text == "euler" || text == "ExplicitEuler") return Integrator::ExplicitEuler;
  if (text == "rk4" || text == "RK4") return Integrator::RK4;
  return std::nullopt;
}

void SimulationConfig::validate() const {
  if (!(end_time >= 0.0) || std::isinf(end_time))
    throw std::invalid_argument("end_time must be finite and >= 0");
  if (!(continuous_step > 0.0) || std::isinf(continuous_step))
    throw std::invalid_argument("continuous_step must be finite and > 0");
  if (max_iterations == 0) throw std::invalid_argument("max_iterations must be positive");
}

RuntimeFault::RuntimeFault(double time, std::string part_path, std::string cause)
    : std::runtime_error(fmt::format("RuntimeFault at t={} in '{}': {}", model::format_number(time),
                                     part_path, cause)),
      time_(time),
      part_path_(std::move(part_path)),
      cause_(std::move(cause)) {}

AtomicRuntime make_atomic_runtime(const ModelUnit& unit, std::string path,
                                  std::shared_ptr<ExecContext> context, double start) {
  if (unit.kind != UnitKind::Discrete && unit.kind != UnitKind::Continuous)
    throw std::invalid_argument(fmt::format("'{}' is not an atomic unit", unit.name));
  AtomicRuntime rt;
  rt.unit = &unit;
  rt.path = std::move(path);
  rt.context = context ? std::move(context) : std::make_shared<ExecContext>();
  rt.time_of_last_event = start;
  for (const auto& b : unit.parameters) rt.value_env[b.name] = literal_value(b.data_type, b.initial);
  for (const auto& b : unit.values) rt.value_env[b.name] = literal_value(b.data_type, b.initial);
  for (const auto& p : unit.ports)
    rt.ports[p.name] = p.initial ? literal_value(p.port_type, *p.initial) : default_value(p.port_type);
  if (unit.kind == UnitKind::Discrete && unit.states) {
    guarded(start, rt.path, [&] {
      Transition tr(rt, start);
      tr.enter(unit.states->initial_state);
      rt.pending_outputs = tr.outputs();
    });
  }
  return rt;
}

std::vector<PortEvent> internal_transition(AtomicRuntime& rt, double now) {
  if (rt.unit->kind != UnitKind::Discrete || !rt.unit->states) return {};
  return guarded(now, rt.path, [&] {
    Transition tr(rt, now);
    const auto& state = current_state(rt, now);
    std::string next = state.name;
    for (const auto& t : state.transforms) {
      if (!uses_timeout(*rt.context, t.condition)) continue;
      if (!truthy(rt.context->eval(t.condition, tr.scope(true)))) continue;
      tr.run(t.actions, true);
      if (t.target) next = *t.target;
      break;
    }
    tr.enter(next);
    return tr.outputs();
  });
}

std::vector<PortEvent> external_transition(AtomicRuntime& rt, const std::vector<PortEvent>& inputs,
                                           double now) {
  for (const auto& e : inputs) {
    const auto* decl = rt.unit->find_port(e.port);
    if (!decl || decl->direction == PortDirection::Output)
      throw RuntimeFault(now, rt.path, fmt::format("input on undeclared input port '{}'", e.port));
    rt.ports[e.port] = e.value;
  }
  if (inputs.empty() || rt.unit->kind != UnitKind::Discrete || !rt.unit->states) return {};
  return guarded(now, rt.path, [&] {
    Transition tr(rt, now);
    const auto& state = current_state(rt, now);
    for (const auto& t : state.transforms) {
      if (uses_timeout(*rt.context, t.condition)) continue;
      if (!truthy(rt.context->eval(t.condition, tr.scope(false)))) continue;
      tr.run(t.actions, false);
      if (t.target) tr.enter(*t.target);
      break;
    }
    return tr.outputs();
  });
}

std::pair<AtomicRuntime, std::vector<PortEvent>> step_atomic(AtomicRuntime rt,
                                                             const std::vector<PortEvent>& inputs,
                                                             double now) {
  if (now < rt.time_of_last_event)
    throw RuntimeFault(now, rt.path, "step requested before the last event");
  if (now > rt.next_internal_time())
    throw RuntimeFault(now, rt.path, "step skips a scheduled internal transition");
  std::vector<PortEvent> out = std::move(rt.pending_outputs);
  rt.pending_outputs.clear();
  if (now == rt.next_internal_time()) {
    auto o = internal_transition(rt, now);
    out.insert(out.end(), o.begin(), o.end());
  }
  if (!inputs.empty()) {
    auto o = external_transition(rt, inputs, now);
    out.insert(out.end(), o.begin(), o.end());
  }
  return {std::move(rt), std::move(out)};
}

namespace {

/// Causal ordering of a continuous unit's equations.
struct ContinuousPlan {
  std::vector<std::string> states;      // derivative targets
  std::vector<std::string> derivative;  // rhs per state
  std::vector<const model::Equation*> algebraic;  // evaluation order
};

ContinuousPlan plan_equations(const ModelUnit& unit, ExecContext& ctx, const std::string& path) {
  ContinuousPlan plan;
  std::vector<const model::Equation*> algebraic;
  for (const auto& eq : unit.equations) {
    if (eq.derivative) {
      if (std::find(plan.states.begin(), plan.states.end(), eq.target) != plan.states.end())
        throw RuntimeFault(0.0, path, fmt::format("'{}' has two derivative equations", eq.target));
      plan.states.push_back(eq.target);
      plan.derivative.push_back(eq.rhs);
    } else {
      algebraic.push_back(&eq);
    }
  }
  // Kahn's algorithm, picking the earliest ready equation in source order.
  std::size_t n = algebraic.size();
  std::vector<std::set<std::size_t>> deps(n);
  for (std::size_t i = 0; i < n; ++i) {
    model::ExprSymbols symbols;
    model::collect_symbols(ctx.compile(algebraic[i]->rhs), symbols);
    for (std::size_t j = 0; j < n; ++j)
      if (symbols.variables.count(algebraic[j]->target)) {
        if (i == j)
          throw RuntimeFault(0.0, path, fmt::format("algebraic loop through '{}'", algebraic[i]->target));
        deps[i].insert(j);
      }
  }
  std::vector<bool> done(n, false);
  for (std::size_t placed = 0; placed < n; ++placed) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n && pick == n; ++i) {
      if (done[i]) continue;
      bool ready = std::all_of(deps[i].begin(), deps[i].end(), [&](std::size_t j) { return done[j]; });
      if (ready) pick = i;
    }
    if (pick == n) throw RuntimeFault(0.0, path, "algebraic loop among equations");
    done[pick] = true;
    plan.algebraic.push_back(algebraic[pick]);
  }
  return plan;
}

struct Hop {
  std::string path;
  std::string port;
  int atomic = -1;  // index of the receiving atomic, -1 for a couple port
};

struct Instance {
  const model::InstanceNode* node = nullptr;
  const ModelUnit* unit = nullptr;
  int parent = -1;
  int atomic = -1;
};

struct Atomic {
  AtomicRuntime rt;
  const ContinuousPlan* plan = nullptr;  // continuous only
  int instance = -1;
  std::size_t grid_index = 0;
  double next_emit = kInf;
  std::vector<double> pending;  // integrated state awaiting emission
  std::vector<double> carry;    // compensated-summation residue per state

  double next_time() const { return plan ? next_emit : rt.next_internal_time(); }
};

class Simulator {
 public:
  Simulator(const model::LinkedModel& model, const SimulationConfig& config)
      : model_(model), config_(config),
        context_(std::make_shared<ExecContext>(model.units, config.seed)) {
    flatten(model.root, -1);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < instances_.size(); ++i)
      if (instances_[i].unit->kind == UnitKind::Discrete || instances_[i].unit->kind == UnitKind::Continuous)
        order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return instances_[a].node->path < instances_[b].node->path;
    });
    for (std::size_t i : order) {
      instances_[i].atomic = static_cast<int>(atomics_.size());
      Atomic a;
      a.instance = static_cast<int>(i);
      atomics_.push_back(std::move(a));
    }
  }

  SimulationTrace run() {
    std::vector<PortEvent> bag;
    for (auto& a : atomics_) {
      const auto& inst = instances_[a.instance];
      a.rt = make_atomic_runtime(*inst.unit, inst.node->path, context_, 0.0);
      atomic_by_path_[a.rt.path] = static_cast<int>(&a - atomics_.data());
      if (inst.unit->kind == UnitKind::Continuous) {
        auto [it, _] = plans_.try_emplace(inst.unit, plan_equations(*inst.unit, *context_, a.rt.path));
        a.plan = &it->second;
        a.carry.assign(a.plan->states.size(), 0.0);
        record(bag, emit_continuous(a, 0.0));
      } else {
        record(bag, std::exchange(a.rt.pending_outputs, {}));
      }
    }
    cascade(0.0, std::move(bag));
    for (auto& a : atomics_)
      if (a.plan) integrate(a, 0.0);

    double last = 0.0;
    std::size_t same_instant = 0;
    while (true) {
      double t = kInf;
      for (const auto& a : atomics_) t = std::min(t, a.next_time());
      if (std::isinf(t) || t > config_.end_time) break;
      same_instant = (t == last) ? same_instant + 1 : 0;
      if (same_instant > config_.max_iterations)
        throw RuntimeFault(t, model_.top_unit().name, "non-converging: too many transitions at one instant");
      last = t;

      std::vector<std::size_t> emitted_continuous;
      bag.clear();
      for (std::size_t i = 0; i < atomics_.size(); ++i) {
        auto& a = atomics_[i];
        if (a.next_time() != t) continue;
        if (a.plan) {
          record(bag, emit_continuous(a, t));
          emitted_continuous.push_back(i);
        } else {
          record(bag, internal_transition(a.rt, t));
        }
      }
      cascade(t, std::move(bag));
      for (std::size_t i : emitted_continuous) integrate(atomics_[i], t);
    }
    return std::move(trace_);
  }

 private:
  void flatten(const model::InstanceNode& node, int parent) {
    int index = static_cast<int>(instances_.size());
    instances_.push_back({&node, &model_.units[node.unit], parent, -1});
    for (const auto& child : node.children) flatten(child, index);
  }

  int child_of(int couple, const std::string& instance) const {
    for (std::size_t i = 0; i < instances_.size(); ++i)
      if (instances_[i].parent == couple && instances_[i].node->instance == instance)
        return static_cast<int>(i);
    return -1;
  }

  void resolve(int couple, const model::Endpoint& from, std::vector<Hop>& hops, int depth) const {
    if (depth > static_cast<int>(instances_.size()) + 1) return;
    const auto& inst = instances_[couple];
    for (const auto& c : inst.unit->connections) {
      if (c.from != from) continue;
      if (c.to.is_external()) {
        hops.push_back({inst.node->path, c.to.port, -1});
        if (inst.parent >= 0) resolve(inst.parent, {inst.node->instance, c.to.port}, hops, depth + 1);
        continue;
      }
      int child = child_of(couple, c.to.part);
      if (child < 0) continue;
      const auto& target = instances_[child];
      if (target.atomic >= 0) {
        hops.push_back({target.node->path, c.to.port, target.atomic});
      } else if (target.unit->kind == UnitKind::Couple) {
        hops.push_back({target.node->path, c.to.port, -1});
        resolve(child, {"", c.to.port}, hops, depth + 1);
      }
    }
  }

  const std::vector<Hop>& route(int atomic, const std::string& port) {
    auto key = std::make_pair(atomic, port);
    auto it = routes_.find(key);
    if (it != routes_.end()) return it->second;
    std::vector<Hop> hops;
    const auto& inst = instances_[atomics_[atomic].instance];
    if (inst.parent >= 0) resolve(inst.parent, {inst.node->instance, port}, hops, 0);
    std::vector<Hop> unique;
    std::set<std::pair<std::string, std::string>> seen;
    for (auto& h : hops)
      if (seen.insert({h.path, h.port}).second) unique.push_back(std::move(h));
    return routes_.emplace(key, std::move(unique)).first->second;
  }

  void record(std::vector<PortEvent>& bag, std::vector<PortEvent> events) {
    for (auto& e : events) {
      trace_.events.push_back(e);
      bag.push_back(std::move(e));
    }
  }

  int atomic_index(const std::string& path) const { return atomic_by_path_.at(path); }

  void cascade(double t, std::vector<PortEvent> bag) {
    std::size_t rounds = 0;
    while (!bag.empty()) {
      if (++rounds > config_.max_iterations)
        throw RuntimeFault(t, model_.top_unit().name, "non-converging event cascade");
      std::map<int, std::vector<PortEvent>> inbox;
      for (const auto& e : bag) {
        for (const auto& hop : route(atomic_index(e.path), e.port)) {
          PortEvent delivered{t, hop.path, hop.port, e.value};
          trace_.events.push_back(delivered);
          if (hop.atomic >= 0) inbox[hop.atomic].push_back(std::move(delivered));
        }
      }
      std::vector<PortEvent> next;
      for (auto& [index, inputs] : inbox) record(next, external_transition(atomics_[index].rt, inputs, t));
      bag = std::move(next);
    }
  }

  void evaluate_algebraic(const ContinuousPlan& plan, Env& values, Env& ports, double time,
                          const std::string& path) {
    Scope scope{{&values, &ports}, time, false};
    guarded(time, path, [&] {
      for (const auto* eq : plan.algebraic) {
        Value v = context_->eval(eq->rhs, scope);
        if (auto it = ports.find(eq->target); it != ports.end())
          it->second = std::move(v);
        else
          values[eq->target] = std::move(v);
      }
    });
  }

  std::vector<PortEvent> emit_continuous(Atomic& a, double t) {
    for (std::size_t i = 0; i < a.pending.size(); ++i) a.rt.value_env[a.plan->states[i]] = a.pending[i];
    a.pending.clear();
    evaluate_algebraic(*a.plan, a.rt.value_env, a.rt.ports, t, a.rt.path);
    std::vector<PortEvent> out;
    for (const auto& p : a.rt.unit->ports)
      if (p.direction == PortDirection::Output) out.push_back({t, a.rt.path, p.name, a.rt.ports.at(p.name)});
    return out;
  }

  double grid(std::size_t k) const {
    double t = static_cast<double>(k) * config_.continuous_step;
    if (std::fabs(t - config_.end_time) <= 1e-9 * config_.continuous_step) t = config_.end_time;
    return t;
  }

  std::vector<double> derivatives(const Atomic& a, const std::vector<double>& x, double time) {
    Env values = a.rt.value_env;
    Env ports = a.rt.ports;
    for (std::size_t i = 0; i < x.size(); ++i) values[a.plan->states[i]] = x[i];
    evaluate_algebraic(*a.plan, values, ports, time, a.rt.path);
    Scope scope{{&values, &ports}, time, false};
    std::vector<double> dx(x.size());
    guarded(time, a.rt.path, [&] {
      for (std::size_t i = 0; i < x.size(); ++i) dx[i] = as_number(context_->eval(a.plan->derivative[i], scope));
    });
    return dx;
  }

  void integrate(Atomic& a, double t) {
    double t_next = grid(a.grid_index + 1);
    if (t_next > config_.end_time) {
      a.next_emit = kInf;
      return;
    }
    double h = t_next - t;
    std::vector<double> x(a.plan->states.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = as_number(a.rt.value_env.at(a.plan->states[i]));

    std::vector<double> increment(x.size());
    if (config_.integrator == Integrator::ExplicitEuler) {
      auto k1 = derivatives(a, x, t);
      for (std::size_t i = 0; i < x.size(); ++i) increment[i] = h * k1[i];
    } else {
      auto shifted = [&](const std::vector<double>& k, double scale) {
        std::vector<double> y(x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += scale * k[i];
        return y;
      };
      auto k1 = derivatives(a, x, t);
      auto k2 = derivatives(a, shifted(k1, h / 2), t + h / 2);
      auto k3 = derivatives(a, shifted(k2, h / 2), t + h / 2);
      auto k4 = derivatives(a, shifted(k3, h), t + h);
      for (std::size_t i = 0; i < x.size(); ++i)
        increment[i] = h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    a.pending.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double y = increment[i] - a.carry[i];
      double sum = x[i] + y;
      a.carry[i] = (sum - x[i]) - y;
      a.pending[i] = sum;
    }
    ++a.grid_index;
    a.next_emit = t_next;
  }

  const model::LinkedModel& model_;
  SimulationConfig config_;
  std::shared_ptr<ExecContext> context_;
  std::vector<Instance> instances_;
  std::vector<Atomic> atomics_;
  std::map<const ModelUnit*, ContinuousPlan> plans_;
  std::map<std::pair<int, std::string>, std::vector<Hop>> routes_;
  std::map<std::string, int> atomic_by_path_;
  SimulationTrace trace_;
};

}  // namespace

SimulationTrace simulate(const model::LinkedModel& model, const SimulationConfig& config) {
  config.validate();
  Simulator sim(model, config);
  return sim.run();
}

}  // namespace xgen::sim
