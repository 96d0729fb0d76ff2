#include "xgen/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <fmt/format.h>

#include "xgen/model/linker.hpp"
#include "xgen/model/names.hpp"
#include "xgen/model/parser.hpp"
#include "xgen/sim/kernel.hpp"
#include "xgen/util/bounded.hpp"

namespace xgen::eval {

using model::Diagnostic;
using model::ModelUnit;
using model::UnitKind;

std::string_view to_string(WeightsSource source) {
  return source == WeightsSource::Entropy ? "entropy" : "explicit";
}

// ---------------------------------------------------------------------- config

namespace {

double number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw std::invalid_argument(fmt::format("'{}' must be a number", key));
  return v.get<double>();
}

template <typename Fields>
void read_fields(const nlohmann::json& j, const std::string& where, const Fields& fields) {
  if (!j.is_object()) throw std::invalid_argument(fmt::format("'{}' must be an object", where));
  for (const auto& [key, v] : j.items()) {
    auto it = fields.find(key);
    if (it == fields.end()) throw std::invalid_argument(fmt::format("unknown key '{}' in '{}'", key, where));
    *it->second = number(v, where + "." + key);
  }
}

void check_weights(std::initializer_list<double> group, const std::string& name) {
  double sum = 0;
  for (double w : group) {
    if (!(w >= 0) || !std::isfinite(w)) throw WeightMismatch(fmt::format("{} weights must be non-negative", name));
    sum += w;
  }
  if (sum <= 0) throw WeightMismatch(fmt::format("{} weights sum to zero", name));
}

}  // namespace

void EvalConfig::validate() const {
  penalties.validate();
  check_weights({couple_weights.k_h, couple_weights.k_a, couple_weights.k_c}, "couple");
  check_weights({atomic_weights.k_h, atomic_weights.k_d, atomic_weights.k_s}, "discrete");
  check_weights({atomic_weights.k_h, atomic_weights.k_d, atomic_weights.k_e}, "continuous");
  for (const auto& [name, w] : subsystem_weights)
    if (!(w >= 0) || !std::isfinite(w)) throw WeightMismatch(fmt::format("weight of '{}' must be non-negative", name));
  if (!(end_time > 0)) throw std::invalid_argument("end_time must be positive");
  if (!(continuous_step > 0)) throw std::invalid_argument("continuous_step must be positive");
  if (!(tolerance >= 0)) throw std::invalid_argument("tolerance must be non-negative");
}

EvalConfig eval_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("evaluation config must be a JSON object");
  EvalConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "penalties") {
      auto& p = c.penalties;
      read_fields(v, key,
                  std::map<std::string, double*>{{"epsilon", &p.epsilon},
                                                 {"eps_header", &p.eps_header},
                                                 {"eps_port", &p.eps_port},
                                                 {"eps_definition", &p.eps_definition},
                                                 {"alpha_c", &p.alpha_c},
                                                 {"beta_c", &p.beta_c},
                                                 {"len_c", &p.len_c}});
    } else if (key == "couple_weights") {
      auto& w = c.couple_weights;
      read_fields(v, key, std::map<std::string, double*>{{"k_h", &w.k_h}, {"k_a", &w.k_a}, {"k_c", &w.k_c}});
    } else if (key == "atomic_weights") {
      auto& w = c.atomic_weights;
      read_fields(v, key,
                  std::map<std::string, double*>{{"k_h", &w.k_h}, {"k_d", &w.k_d}, {"k_s", &w.k_s}, {"k_e", &w.k_e}});
    } else if (key == "subsystem_weights") {
      if (!v.is_object()) throw std::invalid_argument("'subsystem_weights' must be an object");
      for (const auto& [name, w] : v.items()) c.subsystem_weights[name] = number(w, key + "." + name);
    } else if (key == "weights_source") {
      auto s = v.is_string() ? v.get<std::string>() : "";
      if (s == "explicit") {
        c.weights_source = WeightsSource::Explicit;
      } else if (s == "entropy") {
        c.weights_source = WeightsSource::Entropy;
      } else {
        throw std::invalid_argument("'weights_source' must be 'explicit' or 'entropy'");
      }
    } else if (key == "end_time") {
      c.end_time = number(v, key);
    } else if (key == "continuous_step") {
      c.continuous_step = number(v, key);
    } else if (key == "tolerance") {
      c.tolerance = number(v, key);
    } else {
      throw std::invalid_argument(fmt::format("unknown evaluation key '{}'", key));
    }
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const EvalConfig& c) {
  nlohmann::ordered_json j;
  const auto& p = c.penalties;
  j["penalties"] = {{"epsilon", p.epsilon},     {"eps_header", p.eps_header}, {"eps_port", p.eps_port},
                    {"eps_definition", p.eps_definition}, {"alpha_c", p.alpha_c}, {"beta_c", p.beta_c},
                    {"len_c", p.len_c}};
  j["couple_weights"] = {{"k_h", c.couple_weights.k_h}, {"k_a", c.couple_weights.k_a}, {"k_c", c.couple_weights.k_c}};
  j["atomic_weights"] = {{"k_h", c.atomic_weights.k_h},
                         {"k_d", c.atomic_weights.k_d},
                         {"k_s", c.atomic_weights.k_s},
                         {"k_e", c.atomic_weights.k_e}};
  j["subsystem_weights"] = c.subsystem_weights;
  j["weights_source"] = to_string(c.weights_source);
  j["end_time"] = c.end_time;
  j["continuous_step"] = c.continuous_step;
  j["tolerance"] = c.tolerance;
  return j;
}

Annotations annotations_from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("annotations must be a JSON object keyed by unit");
  Annotations out;
  for (const auto& [unit, entry] : j.items()) {
    if (!entry.is_object()) throw std::invalid_argument(fmt::format("annotation of '{}' must be an object", unit));
    Annotation a;
    for (const auto& [key, v] : entry.items()) {
      if (key == "n") {
        if (!v.is_number_unsigned()) throw std::invalid_argument(fmt::format("'{}.n' must be a non-negative integer", unit));
        a.n = v.get<std::size_t>();
      } else if (key == "notes") {
        if (!v.is_string()) throw std::invalid_argument(fmt::format("'{}.notes' must be a string", unit));
        a.notes = v.get<std::string>();
      } else {
        throw std::invalid_argument(fmt::format("unknown key '{}' in annotation of '{}'", key, unit));
      }
    }
    out[unit] = a;
  }
  return out;
}

// ----------------------------------------------------------------- measurement

namespace {

bool behaviour_section(std::string_view section) { return section == "state" || section == "equation"; }

std::string endpoint_key(const model::Connection& c) {
  return fmt::format("{}\x1f{}\x1f{}\x1f{}", c.from.part, c.from.port, c.to.part, c.to.port);
}

class Measurer {
 public:
  Measurer(const std::vector<SourceFile>& generated, const std::vector<ModelUnit>& reference,
           const Annotations& annotations, const EvalConfig& config)
      : reference_(reference), annotations_(annotations), config_(config) {
    parse(generated);
    link_reference();
    match();
  }

  Evaluation run() {
    consistency_ = consistency_check(units_, slot_of_);
    Evaluation ev;
    ev.diagnostics = diagnostics_;
    const auto& top = reference_linked_->top_unit();
    ev.root = measure(top, "");
    for (const auto& u : units_)
      if (!gen_to_ref_.count(u.name)) ev.unmatched.push_back(u.name);
    std::function<void(const ScoreTree&)> any_assumed = [&](const ScoreTree& t) {
      ev.n_assumed_zero = ev.n_assumed_zero || t.n_assumed_zero;
      for (const auto& c : t.children) any_assumed(c);
    };
    any_assumed(ev.root);
    return ev;
  }

 private:
  void parse(const std::vector<SourceFile>& generated) {
    std::set<std::string> seen;
    for (const auto& file : generated) {
      auto result = model::parse_units_recovering(file.text, file.path);
      for (auto& d : result.diagnostics) {
        if (d.severity == model::Severity::Error) ++syntax_[d.unit][behaviour_section(d.section)];
        diagnostics_.push_back(std::move(d));
      }
      for (auto& u : result.units) {
        if (!seen.insert(u.name).second) {
          diagnostics_.push_back(Diagnostic{model::Severity::Warning, model::DiagCode::DuplicateName, u.span,
                                            fmt::format("unit '{}' is defined more than once; the first is scored",
                                                        u.name),
                                            {}, u.name});
          continue;
        }
        units_.push_back(std::move(u));
      }
    }
    if (units_.empty()) throw NoModels("the generated model set holds no unit");
    for (const auto& u : units_)
      for (const auto& d : model::check_unit_symbols(u, {}, true))
        if (behaviour_section(d.section)) ++syntax_[u.name][true];
  }

  void link_reference() {
    auto linked = model::link_model_set(reference_);
    if (!linked.ok()) {
      std::string first = linked.diagnostics.empty() ? "" : model::format_diagnostic(linked.diagnostics.front());
      throw std::invalid_argument(fmt::format("reference model set does not link: {}", first));
    }
    reference_linked_ = std::move(linked.model);
    reference_trace_ = sim::simulate(*reference_linked_, sim_config());
  }

  sim::SimulationConfig sim_config() const {
    sim::SimulationConfig s;
    s.end_time = config_.end_time;
    s.continuous_step = config_.continuous_step;
    return s;
  }

  void match() {
    std::set<std::size_t> used;
    std::vector<const ModelUnit*> pending;
    for (const auto& ref : reference_) {
      auto key = model::normalize_name(ref.name);
      bool found = false;
      for (std::size_t i = 0; i < units_.size(); ++i) {
        if (!used.count(i) && model::normalize_name(units_[i].name) == key) {
          pair(ref, i, used);
          found = true;
          break;
        }
      }
      if (!found && ref.kind != UnitKind::Function) pending.push_back(&ref);
    }
    // Renamed units: same kind, most shared port names.
    for (const auto* ref : pending) {
      std::optional<std::size_t> best;
      std::size_t best_overlap = 0;
      for (std::size_t i = 0; i < units_.size(); ++i) {
        const auto& g = units_[i];
        if (used.count(i) || g.kind != ref->kind) continue;
        std::size_t overlap = 0;
        for (const auto& p : g.ports)
          for (const auto& q : ref->ports)
            if (model::normalize_name(p.name) == model::normalize_name(q.name)) ++overlap;
        bool portless = g.ports.empty() && ref->ports.empty();
        if ((overlap > best_overlap) || (portless && !best)) {
          best = i;
          best_overlap = overlap;
        }
      }
      if (best) {
        pair(*ref, *best, used);
        slot_of_[units_[*best].name] = ref->name;
      }
    }
  }

  void pair(const ModelUnit& ref, std::size_t gen, std::set<std::size_t>& used) {
    used.insert(gen);
    ref_to_gen_[ref.name] = &units_[gen];
    gen_to_ref_[units_[gen].name] = ref.name;
  }

  std::string reference_name_of(const std::string& generated) const {
    auto it = gen_to_ref_.find(generated);
    return it == gen_to_ref_.end() ? generated : it->second;
  }

  /// Reference set with `gen` standing in for `ref_name`, plus the generated
  /// versions of the functions it calls.
  bool behaves_like_reference(const ModelUnit& gen, const std::string& ref_name, std::vector<std::string>& notes) const {
    auto units = reference_linked_->units;
    auto stand_in = gen;
    stand_in.name = ref_name;
    for (auto& imp : stand_in.imports) imp.name = reference_name_of(imp.name);
    for (auto& part : stand_in.parts) part.class_name = reference_name_of(part.class_name);
    auto place = [&units](ModelUnit u) {
      auto it = std::find_if(units.begin(), units.end(), [&](const ModelUnit& x) { return x.name == u.name; });
      if (it == units.end()) {
        units.push_back(std::move(u));
      } else {
        *it = std::move(u);
      }
    };
    for (const auto& callee : model::called_functions(gen)) {
      auto it = std::find_if(units_.begin(), units_.end(), [&](const ModelUnit& u) {
        return u.kind == UnitKind::Function && u.name == callee;
      });
      if (it != units_.end()) place(*it);
    }
    place(std::move(stand_in));

    model::LinkOptions opts;
    opts.top = reference_linked_->top_unit().name;
    auto linked = model::link_model_set(std::move(units), opts);
    if (!linked.ok()) {
      notes.push_back(fmt::format("does not link in place of the reference: {}",
                                  linked.diagnostics.empty() ? std::string("unknown fault")
                                                             : model::format_diagnostic(linked.diagnostics.front())));
      return false;
    }
    try {
      auto trace = sim::simulate(*linked.model, sim_config());
      auto diff = sim::compare_traces(trace, reference_trace_, config_.tolerance);
      if (diff.all_match()) return true;
      for (const auto& v : diff.ports) {
        if (!v.match) {
          notes.push_back(fmt::format("output {}.{} differs: {}", v.path, v.port, v.reason));
          break;
        }
      }
    } catch (const sim::PortSetMismatch& e) {
      notes.push_back(fmt::format("trace ports differ: {}", e.what()));
    } catch (const sim::RuntimeFault& e) {
      notes.push_back(fmt::format("runtime fault at t={} in {}: {}", e.time(), e.part_path(), e.cause()));
    } catch (const std::exception& e) {
      notes.push_back(fmt::format("simulation failed: {}", e.what()));
    }
    return false;
  }

  const Annotation* annotation_for(const std::string& ref_name, const std::string& gen_name) const {
    for (const auto& [name, a] : annotations_) {
      auto key = model::normalize_name(name);
      if (key == model::normalize_name(ref_name) || key == model::normalize_name(gen_name)) return &a;
    }
    return nullptr;
  }

  ScoreTree measure(const ModelUnit& ref, const std::string& instance) {
    ScoreTree t;
    t.name = ref.name;
    t.instance = instance;
    t.kind = ref.kind;
    if (ref.kind == UnitKind::Couple) {
      for (const auto& part : ref.parts)
        if (const auto* child = reference_linked_->find(part.class_name)) t.children.push_back(measure(*child, part.instance_name));
    }

    auto it = ref_to_gen_.find(ref.name);
    if (it == ref_to_gen_.end()) {
      t.missing = true;
      t.notes.push_back("no generated unit");
      return t;
    }
    const auto& gen = *it->second;
    t.generated_name = gen.name;

    const auto& syntax = syntax_[gen.name];
    const std::size_t behaviour_faults = syntax.count(true) ? syntax.at(true) : 0;
    const std::size_t other_faults = syntax.count(false) ? syntax.at(false) : 0;
    const auto& tallies = consistency_.at(gen.name);
    t.header = tallies.header;
    t.port = tallies.port;
    t.definition = tallies.definition;
    for (const auto& issue : tallies.issues) t.notes.push_back(issue);

    const auto* note = annotation_for(ref.name, gen.name);
    t.counts.n = note ? note->n : 0;
    t.n_assumed_zero = note == nullptr;

    const auto& pen = config_.penalties;
    if (ref.kind == UnitKind::Couple) {
      t.header.ie += behaviour_faults + other_faults;
      t.counts.m = behaviour_faults + other_faults;
      std::vector<std::string> gen_parts, ref_parts, gen_conns, ref_conns;
      for (const auto& p : gen.parts) gen_parts.push_back(p.class_name);
      for (const auto& p : ref.parts) ref_parts.push_back(p.class_name);
      for (const auto& c : gen.connections) gen_conns.push_back(endpoint_key(c));
      for (const auto& c : ref.connections) ref_conns.push_back(endpoint_key(c));
      auto part_f1 = match_f1(gen_parts, ref_parts).f1;
      auto port = element_similarity(t.port, pen.eps_port);
      t.components["header"] = element_similarity(t.header, pen.eps_header);
      t.components["part_f1"] = part_f1;
      t.components["port"] = port;
      t.components["attribute"] = part_f1 * port;
      t.components["connection"] = match_f1(gen_conns, ref_conns).f1;
    } else {
      t.definition.ie += other_faults;
      t.counts.m = behaviour_faults;
      std::size_t len = 0;
      if (gen.kind == UnitKind::Discrete && gen.states) len = gen.states->states.size();
      if (gen.kind == UnitKind::Continuous) len = gen.equations.size();
      t.counts.len = std::max<std::size_t>(len, 1);
      t.components["header"] = element_similarity(t.header, pen.eps_header);
      t.components["definition"] = element_similarity(t.definition, pen.eps_definition);
      t.components[ref.kind == UnitKind::Continuous ? "equation" : "state"] = behavior_similarity(t.counts, pen);
      if (gen.kind != ref.kind)
        t.notes.push_back(fmt::format("generated as {} instead of {}", model::to_string(gen.kind),
                                      model::to_string(ref.kind)));
    }

    bool runs = behaves_like_reference(gen, ref.name, t.notes);
    t.fully_correct = runs && t.counts.m == 0 && t.counts.n == 0 && other_faults == 0 && gen.kind == ref.kind;
    return t;
  }

  const std::vector<ModelUnit>& reference_;
  const Annotations& annotations_;
  const EvalConfig& config_;
  std::vector<ModelUnit> units_;
  std::vector<Diagnostic> diagnostics_;
  // unit -> (in a behaviour section?) -> error count
  std::map<std::string, std::map<bool, std::size_t>> syntax_;
  std::optional<model::LinkedModel> reference_linked_;
  sim::SimulationTrace reference_trace_;
  std::map<std::string, const ModelUnit*> ref_to_gen_;
  std::map<std::string, std::string> gen_to_ref_;
  std::map<std::string, std::string> slot_of_;
  ConsistencyReport consistency_;
};

// --------------------------------------------------------------------- scoring

struct Weights {
  CoupleWeights couple;
  AtomicWeights atomic;
};

double child_weight(const EvalConfig& config, const ScoreTree& child) {
  for (const auto& key : {child.instance, child.name}) {
    auto it = config.subsystem_weights.find(key);
    if (it != config.subsystem_weights.end()) return it->second;
  }
  return 1.0;
}

/// Fills P and A of one node from its components.
void score_node(ScoreTree& t, const Weights& w, const PenaltyConfig& pen) {
  t.weights.clear();
  if (t.missing) {
    t.A = t.P = 0.0;
    return;
  }
  if (t.kind == UnitKind::Couple) {
    double sum = w.couple.k_h + w.couple.k_a + w.couple.k_c;
    t.weights = {{"k_h", w.couple.k_h / sum}, {"k_a", w.couple.k_a / sum}, {"k_c", w.couple.k_c / sum}};
    t.P = couple_similarity(t.components.at("header"), t.components.at("part_f1"), t.components.at("port"),
                            t.components.at("connection"), w.couple);
  } else {
    AtomicParts parts;
    parts.header = t.components.at("header");
    parts.definition = t.components.at("definition");
    const bool discrete = t.kind == UnitKind::Discrete;
    const double k_b = discrete ? w.atomic.k_s : w.atomic.k_e;
    double sum = w.atomic.k_h + w.atomic.k_d + k_b;
    t.weights = {{"k_h", w.atomic.k_h / sum}, {"k_d", w.atomic.k_d / sum}, {discrete ? "k_s" : "k_e", k_b / sum}};
    if (discrete) {
      parts.state = t.components.at("state");
    } else {
      parts.equation = t.components.at("equation");
    }
    t.P = atomic_similarity(parts, t.kind, w.atomic);
  }
  t.A = simulation_correctness(t.fully_correct, t.P, pen.epsilon);
}

void roll_up(ScoreTree& t, const std::vector<double>& c) {
  if (t.kind != UnitKind::Couple) return;
  std::vector<double> child_a;
  for (const auto& child : t.children) child_a.push_back(child.score());
  t.final = child_a.empty() ? t.A : score_couple(t.A, c, child_a);
  double sum = 0;
  for (double x : c) sum += x;
  for (std::size_t i = 0; i < t.children.size(); ++i)
    t.weights["C:" + (t.children[i].instance.empty() ? t.children[i].name : t.children[i].instance)] = c[i] / sum;
}

void score_explicit(ScoreTree& t, const Weights& w, const EvalConfig& config) {
  for (auto& child : t.children) score_explicit(child, w, config);
  score_node(t, w, config.penalties);
  if (t.kind == UnitKind::Couple) {
    std::vector<double> c;
    for (const auto& child : t.children) c.push_back(child_weight(config, child));
    if (!c.empty() && std::all_of(c.begin(), c.end(), [](double x) { return x == 0; }))
      throw WeightMismatch(fmt::format("subsystem weights of {} sum to zero", t.name));
    roll_up(t, c);
  }
}

void collect(ScoreTree& t, std::vector<ScoreTree*>& atomics, std::vector<ScoreTree*>& couples) {
  (t.kind == UnitKind::Couple ? couples : atomics).push_back(&t);
  for (auto& c : t.children) collect(c, atomics, couples);
}

/// Column means of the named components over a set's nodes; missing nodes count 0.
std::vector<double> component_means(const std::vector<ScoreTree*>& nodes, const std::vector<std::vector<std::string>>& keys) {
  std::vector<double> out(keys.size(), 0.0);
  if (nodes.empty()) return out;
  for (const auto* n : nodes) {
    for (std::size_t k = 0; k < keys.size(); ++k) {
      for (const auto& key : keys[k]) {
        auto it = n->components.find(key);
        if (it != n->components.end()) out[k] += it->second;
      }
    }
  }
  for (auto& v : out) v /= static_cast<double>(nodes.size());
  return out;
}

/// Entropy subsystem weights for the same couple across all sets, deepest first.
bool entropy_roll_up(const std::vector<ScoreTree*>& nodes) {
  bool fallback = false;
  auto& first = *nodes.front();
  for (std::size_t i = 0; i < first.children.size(); ++i) {
    if (first.children[i].kind != UnitKind::Couple) continue;
    std::vector<ScoreTree*> column;
    for (auto* n : nodes) column.push_back(&n->children[i]);
    fallback = entropy_roll_up(column) || fallback;
  }
  if (first.children.empty()) {
    for (auto* n : nodes) n->final = n->A;
    return fallback;
  }
  std::vector<std::vector<double>> matrix;
  for (auto* n : nodes) {
    std::vector<double> row;
    for (const auto& c : n->children) row.push_back(c.score());
    matrix.push_back(std::move(row));
  }
  auto ewm = entropy_weights(matrix);
  for (auto* n : nodes) roll_up(*n, ewm.weights);
  return fallback || ewm.uniform_fallback;
}

}  // namespace

Evaluation evaluate_model_set(const std::vector<SourceFile>& generated, const std::vector<ModelUnit>& reference,
                              const Annotations& annotations, const EvalConfig& config) {
  auto batch = evaluate_batch({generated}, reference, {annotations}, config, 1);
  return std::move(batch.front());
}

std::vector<Evaluation> evaluate_batch(const std::vector<std::vector<SourceFile>>& sets,
                                       const std::vector<ModelUnit>& reference,
                                       const std::vector<Annotations>& annotations, const EvalConfig& config,
                                       std::size_t max_in_flight) {
  config.validate();
  if (sets.empty()) throw NoModels("no model set to evaluate");
  if (!annotations.empty() && annotations.size() != sets.size())
    throw std::invalid_argument(
        fmt::format("{} annotation file(s) for {} model set(s)", annotations.size(), sets.size()));
  static const Annotations none;
  std::vector<Evaluation> out(sets.size());
  util::for_each_bounded(sets.size(), max_in_flight, [&](std::size_t i) {
    out[i] = Measurer(sets[i], reference, annotations.empty() ? none : annotations[i], config).run();
  });

  Weights explicit_weights{config.couple_weights, config.atomic_weights};
  if (config.weights_source == WeightsSource::Explicit || sets.size() < 2) {
    for (auto& ev : out) {
      score_explicit(ev.root, explicit_weights, config);
      ev.weights_source = config.weights_source == WeightsSource::Explicit ? "explicit"
                                                                            : "explicit (entropy needs two or more sets)";
    }
    return out;
  }

  // Component weights from the per-set mean similarities.
  std::vector<std::vector<double>> atomic_rows, couple_rows;
  for (auto& ev : out) {
    std::vector<ScoreTree*> atomics, couples;
    collect(ev.root, atomics, couples);
    atomic_rows.push_back(component_means(atomics, {{"header"}, {"definition"}, {"state", "equation"}}));
    couple_rows.push_back(component_means(couples, {{"header"}, {"attribute"}, {"connection"}}));
  }
  auto atomic_ewm = entropy_weights(atomic_rows);
  auto couple_ewm = entropy_weights(couple_rows);
  Weights w;
  w.atomic = {atomic_ewm.weights[0], atomic_ewm.weights[1], atomic_ewm.weights[2], atomic_ewm.weights[2]};
  w.couple = {couple_ewm.weights[0], couple_ewm.weights[1], couple_ewm.weights[2]};

  std::vector<ScoreTree*> roots;
  for (auto& ev : out) {
    std::vector<ScoreTree*> atomics, couples;
    collect(ev.root, atomics, couples);
    for (auto* n : atomics) score_node(*n, w, config.penalties);
    for (auto* n : couples) score_node(*n, w, config.penalties);
    roots.push_back(&ev.root);
  }
  bool fallback = entropy_roll_up(roots) || atomic_ewm.uniform_fallback || couple_ewm.uniform_fallback;
  for (auto& ev : out) {
    ev.weights_source = "entropy";
    ev.uniform_fallback = fallback;
  }
  return out;
}

// --------------------------------------------------------------------- reports

namespace {

nlohmann::ordered_json tally_json(const ConsistencyTally& t) { return {{"ce", t.ce}, {"ie", t.ie}}; }

}  // namespace

nlohmann::json to_json(const ScoreTree& t) {
  nlohmann::ordered_json j;
  j["name"] = t.name;
  if (!t.instance.empty()) j["instance"] = t.instance;
  j["generated"] = t.generated_name;
  j["kind"] = model::to_string(t.kind);
  j["A"] = t.A;
  j["P"] = t.P;
  if (t.final) j["final"] = *t.final;
  j["components"] = t.components;
  j["weights"] = t.weights;
  j["counts"] = {{"m", t.counts.m}, {"n", t.counts.n}, {"len", t.counts.len}};
  j["consistency"] = {{"header", tally_json(t.header)},
                      {"port", tally_json(t.port)},
                      {"definition", tally_json(t.definition)}};
  j["fully_correct"] = t.fully_correct;
  j["missing"] = t.missing;
  j["n_assumed_zero"] = t.n_assumed_zero;
  j["notes"] = t.notes;
  auto children = nlohmann::json::array();
  for (const auto& c : t.children) children.push_back(to_json(c));
  j["children"] = std::move(children);
  return j;
}

nlohmann::json to_json(const Evaluation& ev) {
  nlohmann::ordered_json j;
  j["score_top"] = ev.root.score();
  j["weights_source"] = ev.weights_source;
  j["uniform_fallback"] = ev.uniform_fallback;
  j["n_assumed_zero"] = ev.n_assumed_zero;
  j["unmatched"] = ev.unmatched;
  j["tree"] = to_json(ev.root);
  j["diagnostics"] = nlohmann::json::parse(model::diagnostics_to_json(ev.diagnostics));
  return j;
}

std::string to_csv(const Evaluation& ev) {
  static const std::vector<std::string> columns{"header", "definition", "state",     "equation",
                                                "part_f1", "port",      "attribute", "connection"};
  std::string out = "path,unit,generated,kind,A,P,final";
  for (const auto& c : columns) out += "," + c;
  out += ",m,n,len,fully_correct,missing\n";
  auto num = [](double v) { return fmt::format("{:.12g}", v); };
  std::function<void(const ScoreTree&, const std::string&)> row = [&](const ScoreTree& t, const std::string& path) {
    out += fmt::format("{},{},{},{},{},{},{}", path, t.name, t.generated_name, model::to_string(t.kind), num(t.A),
                       num(t.P), t.final ? num(*t.final) : "");
    for (const auto& c : columns) {
      auto it = t.components.find(c);
      out += "," + (it == t.components.end() ? std::string() : num(it->second));
    }
    out += fmt::format(",{},{},{},{},{}\n", t.counts.m, t.counts.n, t.counts.len, t.fully_correct ? 1 : 0,
                       t.missing ? 1 : 0);
    for (const auto& c : t.children) row(c, path + "." + (c.instance.empty() ? c.name : c.instance));
  };
  row(ev.root, ev.root.name);
  return out;
}

}  // namespace xgen::eval
