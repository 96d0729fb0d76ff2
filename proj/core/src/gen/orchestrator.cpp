#include "xgen/gen/orchestrator.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "xgen/gen/extract.hpp"
#include "xgen/model/expr.hpp"
#include "xgen/model/names.hpp"
#include "xgen/model/parser.hpp"
#include "xgen/model/printer.hpp"
#include "xgen/model/walk.hpp"
#include "xgen/util/bounded.hpp"
#include "xgen/util/hash.hpp"

namespace xgen::gen {

using model::DiagCode;
using model::Diagnostic;
using model::ModelUnit;
using model::Severity;
using model::UnitKind;

namespace {

Diagnostic make_diag(Severity severity, DiagCode code, std::string message, std::string unit = {},
                     std::string section = {}) {
  Diagnostic d;
  d.severity = severity;
  d.code = code;
  d.message = std::move(message);
  d.unit = std::move(unit);
  d.section = std::move(section);
  return d;
}

std::vector<Diagnostic> errors_of(const std::vector<Diagnostic>& diags) {
  std::vector<Diagnostic> out;
  for (const auto& d : diags)
    if (d.severity == Severity::Error) out.push_back(d);
  return out;
}

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool starts_with_word(std::string_view text, std::string_view word) {
  return text.substr(0, word.size()) == word && (text.size() == word.size() || text[word.size()] == ' ');
}

bool is_class_text(std::string_view code) {
  auto t = trim(code);
  for (auto w : {"couple", "discrete", "continuous", "function"})
    if (starts_with_word(t, w)) return true;
  return false;
}

/// A reply holding a whole atomic unit contributes its parameter, value and
/// behaviour sections; the skeleton keeps its own header and ports.
std::string atomic_sections(const std::string& code) {
  if (!is_class_text(code)) return code;
  auto unit = model::parse_unit(code, "reply.x");
  return model::print_section(unit, "parameter") + model::print_section(unit, "value") +
         model::print_section(unit, "state") + model::print_section(unit, "equation");
}

void record_failure(RepairReport& report, RepairAttempt attempt, std::vector<std::string>& notes) {
  attempt.note_added = repair_note(attempt.diagnostics.front());
  notes.push_back(attempt.note_added);
  report.attempts.push_back(std::move(attempt));
}

void check_budget(const GenerationContext& context) {
  if (!context.library) throw std::invalid_argument("generation context has no prompt library");
  if (context.repair_budget == 0) throw std::invalid_argument("repair budget must be at least 1");
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) out += (i ? "\n" : "") + lines[i];
  return out;
}

nlohmann::ordered_json diag_json(const Diagnostic& d) {
  nlohmann::ordered_json j;
  j["severity"] = model::to_string(d.severity);
  j["code"] = model::to_string(d.code);
  j["message"] = d.message;
  if (!d.unit.empty()) j["unit"] = d.unit;
  if (!d.section.empty()) j["section"] = d.section;
  return j;
}

}  // namespace

// ---------------------------------------------------------------- repair notes

std::string_view to_string(NoteClass note) {
  switch (note) {
    case NoteClass::Syntax: return "syntax";
    case NoteClass::UnknownIdentifier: return "unknown identifier";
    case NoteClass::MissingSection: return "missing section";
  }
  return "?";
}

NoteClass note_class_of(const Diagnostic& diag) {
  switch (diag.code) {
    case DiagCode::UnknownIdentifier:
    case DiagCode::UnknownFunction:
    case DiagCode::UnknownPort:
    case DiagCode::UnknownPart:
    case DiagCode::UnknownClass:
    case DiagCode::UnknownState:
      return NoteClass::UnknownIdentifier;
    case DiagCode::MissingSection:
      return NoteClass::MissingSection;
    default:
      return NoteClass::Syntax;
  }
}

std::string repair_note(const Diagnostic& diag) {
  switch (note_class_of(diag)) {
    case NoteClass::Syntax:
      return fmt::format(
          "The previous answer is not valid X language ({}). Follow the grammar above, write each section "
          "keyword followed by ':' and end every item with ';'.",
          diag.message);
    case NoteClass::UnknownIdentifier:
      return fmt::format(
          "The previous answer refers to a name that is not declared ({}). Declare every variable in the "
          "parameter or value section and use only the ports of the generated code.",
          diag.message);
    case NoteClass::MissingSection:
      return fmt::format("The previous answer lacks a required section ({}). Include it.", diag.message);
  }
  return diag.message;
}

nlohmann::ordered_json to_json(const RepairReport& report) {
  nlohmann::ordered_json j;
  j["accepted"] = report.accepted;
  j["attempts"] = nlohmann::ordered_json::array();
  for (const auto& a : report.attempts) {
    nlohmann::ordered_json aj;
    aj["prompt_hash"] = a.prompt.hash();
    aj["generated_text"] = a.generated_text;
    aj["diagnostics"] = nlohmann::ordered_json::array();
    for (const auto& d : a.diagnostics) aj["diagnostics"].push_back(diag_json(d));
    aj["note_added"] = a.note_added;
    j["attempts"].push_back(std::move(aj));
  }
  return j;
}

Exhausted::Exhausted(RepairReport report)
    : std::runtime_error(fmt::format("no acceptable reply after {} attempt(s)", report.attempts.size())),
      report_(std::move(report)) {}

// ------------------------------------------------------------------- hole fill

FillResult fill_hole(const templ::TemplateInstance& skeleton, templ::Hole hole, GeneratorBackend& backend,
                     std::string_view couple_text, std::string_view atomic_text,
                     const GenerationContext& context) {
  check_budget(context);
  if (hole != templ::Hole::State && hole != templ::Hole::Equation)
    throw std::invalid_argument("only state and equation holes are filled by prompting");
  if (!skeleton.holes.count(hole))
    throw std::invalid_argument(fmt::format("'{}' has no {} hole", skeleton.filled.name, templ::to_string(hole)));

  const auto section = std::string(templ::section_of(hole));
  const auto& name = skeleton.filled.name;
  RepairReport report;
  std::vector<std::string> notes;
  for (std::size_t attempt = 0; attempt < context.repair_budget; ++attempt) {
    RepairAttempt a;
    a.prompt = build_state_prompt(couple_text, atomic_text, skeleton, notes, *context.library);
    a.generated_text = backend.complete(a.prompt, context.limits);

    std::optional<ModelUnit> unit;
    try {
      auto spliced = templ::splice_hole(skeleton, hole, atomic_sections(extract_code(a.generated_text)));
      unit = templ::close_holes(spliced);
    } catch (const model::ParseError& e) {
      a.diagnostics.push_back(e.diagnostic());
    }
    if (unit && model::print_section(*unit, section).empty())
      a.diagnostics.push_back(make_diag(Severity::Error, DiagCode::MissingSection,
                                        fmt::format("no {} section for '{}'", section, name), name, section));
    if (unit && a.diagnostics.empty()) a.diagnostics = errors_of(model::check_unit_symbols(*unit, context.functions, true));

    if (a.diagnostics.empty()) {
      report.attempts.push_back(std::move(a));
      report.accepted = true;
      return {std::move(*unit), std::move(report)};
    }
    record_failure(report, std::move(a), notes);
  }
  throw Exhausted(std::move(report));
}

// ----------------------------------------------------------------- connections

ConnectionResult infer_connections(const std::vector<std::string>& connection_corpus,
                                   const doc::ComponentNode& system, GeneratorBackend& backend,
                                   const GenerationContext& context) {
  check_budget(context);
  if (system.children.empty())
    throw std::invalid_argument(fmt::format("'{}' has no subsystems to connect", system.name));

  ConnectionResult result;
  const auto unit_name = model::to_class_name(system.name);
  if (connection_corpus.empty()) {
    result.diagnostics.push_back(make_diag(Severity::Warning, DiagCode::Info,
                                           fmt::format("no connection sentences for '{}'", system.name),
                                           unit_name, "connection"));
    result.report.accepted = true;
    return result;
  }

  std::map<std::string, std::string> instance_by_key;
  std::vector<std::string> names;
  for (const auto& child : system.children) {
    auto inst = model::to_instance_name(child.name);
    names.push_back(child.name);
    instance_by_key[model::normalize_name(child.name)] = inst;
    for (const auto& alias : child.aliases) instance_by_key.emplace(model::normalize_name(alias), inst);
  }

  std::vector<std::string> notes;
  for (std::size_t attempt = 0; attempt < context.repair_budget; ++attempt) {
    RepairAttempt a;
    a.prompt = build_connection_prompt(system.name, names, connection_corpus, notes, *context.library);
    a.generated_text = backend.complete(a.prompt, context.limits);
    std::vector<model::Connection> parsed;
    try {
      parsed = parse_connection_lines(extract_code(a.generated_text));
    } catch (const UnparseableOutput& e) {
      a.diagnostics.push_back(make_diag(Severity::Error, DiagCode::UnexpectedToken, e.what(), unit_name,
                                        "connection"));
      record_failure(result.report, std::move(a), notes);
      if (attempt + 1 == context.repair_budget)
        throw UnparseableOutput(fmt::format("connections of '{}': {}", system.name, e.what()), e.line(),
                                std::move(result.report));
      continue;
    }

    std::set<std::pair<model::Endpoint, model::Endpoint>> seen;
    for (const auto& c : parsed) {
      auto from = instance_by_key.find(model::normalize_name(c.from.part));
      auto to = instance_by_key.find(model::normalize_name(c.to.part));
      if (from == instance_by_key.end() || to == instance_by_key.end()) {
        const auto& ghost = from == instance_by_key.end() ? c.from.part : c.to.part;
        result.diagnostics.push_back(make_diag(
            Severity::Warning, DiagCode::UnknownPart,
            fmt::format("dropped connect({}, {}): '{}' is not a subsystem of '{}'", c.from.str(), c.to.str(), ghost,
                        system.name),
            unit_name, "connection"));
        continue;
      }
      model::Connection resolved{{from->second, c.from.port}, {to->second, c.to.port}, {}};
      if (seen.insert({resolved.from, resolved.to}).second) result.connections.push_back(std::move(resolved));
    }
    result.report.attempts.push_back(std::move(a));
    result.report.accepted = true;
    return result;
  }
  throw std::logic_error("unreachable");
}

// ------------------------------------------------------------------- functions

namespace {

std::map<std::string, std::set<std::size_t>> unit_calls(const ModelUnit& unit) {
  model::ExprSymbols symbols;
  model::walk_unit(unit, [&](const model::ExprSite& site) {
    try {
      model::collect_symbols(model::parse_expression(site.text), symbols);
    } catch (const model::ExprError&) {
    }
  });
  return symbols.calls;
}

}  // namespace

FunctionResult generate_missing_functions(const ModelUnit& unit, GeneratorBackend& backend,
                                          const GenerationContext& context) {
  check_budget(context);
  FunctionResult result;
  std::vector<std::pair<std::string, std::size_t>> wanted;
  for (const auto& [callee, arities] : unit_calls(unit)) {
    if (model::is_builtin_function(callee) || context.functions.count(callee)) continue;
    if (arities.size() > 1)
      result.diagnostics.push_back(make_diag(
          Severity::Warning, DiagCode::UnknownFunction,
          fmt::format("'{}' is called with {} different argument counts; using {}", callee, arities.size(),
                      *arities.begin()),
          unit.name));
    wanted.emplace_back(callee, *arities.begin());
  }

  auto known = context.functions;
  for (const auto& [name, arity] : wanted) known.emplace(name, arity);

  for (const auto& [name, arity] : wanted) {
    RepairReport report;
    std::vector<std::string> notes;
    std::optional<ModelUnit> accepted;
    for (std::size_t attempt = 0; attempt < context.repair_budget && !accepted; ++attempt) {
      RepairAttempt a;
      a.prompt = build_function_prompt(name, arity, unit, notes, *context.library);
      a.generated_text = backend.complete(a.prompt, context.limits);
      std::optional<ModelUnit> fn;
      try {
        auto code = extract_code(a.generated_text);
        if (is_class_text(code)) {
          fn = model::parse_unit(code, name + ".x");
        } else {
          auto skeleton = templ::make_function_skeleton(name, arity);
          fn = templ::close_holes(templ::splice_hole(skeleton, templ::Hole::FunctionBody, code));
        }
      } catch (const model::ParseError& e) {
        a.diagnostics.push_back(e.diagnostic());
      }
      if (fn && fn->kind != UnitKind::Function)
        a.diagnostics.push_back(make_diag(Severity::Error, DiagCode::MissingSection,
                                          fmt::format("expected a function class model, got a {} class",
                                                      model::to_string(fn->kind)),
                                          fn->name));
      else if (fn && fn->name != name)
        a.diagnostics.push_back(make_diag(Severity::Error, DiagCode::UnknownFunction,
                                          fmt::format("expected function '{}', got '{}'", name, fn->name), fn->name));
      else if (fn && fn->body->params.size() != arity)
        a.diagnostics.push_back(make_diag(Severity::Error, DiagCode::UnexpectedToken,
                                          fmt::format("function '{}' takes {} parameter(s), the call sites pass {}",
                                                      name, fn->body->params.size(), arity),
                                          name));
      if (fn && a.diagnostics.empty()) a.diagnostics = errors_of(model::check_unit_symbols(*fn, known, true));

      if (a.diagnostics.empty()) {
        accepted = std::move(fn);
        report.attempts.push_back(std::move(a));
        report.accepted = true;
      } else {
        record_failure(report, std::move(a), notes);
      }
    }
    if (accepted) {
      for (const auto& callee : model::called_functions(*accepted))
        if (!known.count(callee))
          result.diagnostics.push_back(make_diag(
              Severity::Warning, DiagCode::UnknownFunction,
              fmt::format("generated function '{}' calls '{}', which is not generated in turn", name, callee),
              name));
      result.functions.push_back(std::move(*accepted));
    } else {
      result.diagnostics.push_back(make_diag(
          Severity::Error, DiagCode::UnknownFunction,
          fmt::format("no acceptable definition of '{}' after {} attempt(s)", name, report.attempts.size()),
          unit.name));
    }
    result.reports.push_back(std::move(report));
  }
  return result;
}

// -------------------------------------------------------------------- config

nlohmann::ordered_json to_json(const PipelineConfig& config) {
  nlohmann::ordered_json j;
  j["repair_budget"] = config.repair_budget;
  j["max_in_flight"] = config.max_in_flight;
  j["port_convention"] = templ::to_string(config.port_convention);
  j["kinds"] = config.kinds;
  j["port_types"] = config.port_types;
  j["max_tokens"] = config.limits.max_tokens;
  j["temperature"] = config.limits.temperature;
  j["seed"] = config.limits.seed;
  return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("generation config must be a JSON object");
  PipelineConfig c;
  auto count = [](const nlohmann::json& v, const std::string& key, bool positive) {
    if (!v.is_number_unsigned() || (positive && v.get<std::size_t>() == 0))
      throw std::invalid_argument(fmt::format("'{}' must be a {} integer", key, positive ? "positive" : "non-negative"));
    return v.get<std::size_t>();
  };
  auto string_map = [](const nlohmann::json& v, const std::string& key) {
    if (!v.is_object()) throw std::invalid_argument(fmt::format("'{}' must be an object of strings", key));
    std::map<std::string, std::string> out;
    for (const auto& [k, val] : v.items()) {
      if (!val.is_string()) throw std::invalid_argument(fmt::format("'{}.{}' must be a string", key, k));
      out[k] = val.get<std::string>();
    }
    return out;
  };
  for (const auto& [key, v] : doc.items()) {
    if (key == "repair_budget") {
      c.repair_budget = count(v, key, true);
    } else if (key == "max_in_flight") {
      c.max_in_flight = count(v, key, true);
    } else if (key == "port_convention") {
      if (!v.is_string()) throw std::invalid_argument("'port_convention' must be a string");
      c.port_convention = templ::port_convention_from_string(v.get<std::string>());
    } else if (key == "kinds") {
      c.kinds = string_map(v, key);
      for (const auto& [component, kind] : c.kinds)
        if (kind != "discrete" && kind != "continuous")
          throw std::invalid_argument(
              fmt::format("kind of '{}' must be 'discrete' or 'continuous', not '{}'", component, kind));
    } else if (key == "port_types") {
      c.port_types = string_map(v, key);
    } else if (key == "max_tokens") {
      c.limits.max_tokens = count(v, key, true);
    } else if (key == "temperature") {
      if (!v.is_number() || v.get<double>() < 0) throw std::invalid_argument("'temperature' must be >= 0");
      c.limits.temperature = v.get<double>();
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw std::invalid_argument("'seed' must be a non-negative integer");
      c.limits.seed = v.get<std::uint64_t>();
    } else {
      throw std::invalid_argument(fmt::format("unknown generation key '{}'", key));
    }
  }
  return c;
}

// -------------------------------------------------------------------- pipeline

std::vector<ModelUnit> PipelineRun::model_set() const {
  std::vector<ModelUnit> out;
  out.reserve(units.size());
  for (const auto& u : units) out.push_back(u.unit);
  return out;
}

std::string PipelineRun::output_digest() const { return util::fnv1a64_hex(model::print_units(model_set())); }

namespace {

constexpr std::array kContinuousCues{"integrat", "accelerat", "dynamic", "differential", "continuous",
                                     "rate of change"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void append_exchanges(std::vector<Exchange>& out, const RepairReport& report) {
  for (std::size_t i = 0; i < report.attempts.size(); ++i) {
    const auto& a = report.attempts[i];
    out.push_back({a.prompt.purpose, a.prompt.subject, i + 1, a.prompt.hash(), a.prompt.render(), a.generated_text,
                   a.note_added});
  }
}

struct Leaf {
  const doc::ComponentNode* node = nullptr;
  const doc::ComponentNode* parent = nullptr;
  templ::TemplateInstance skeleton;
};

}  // namespace

PipelineRun generate_model_set(const doc::DocPipelineResult& document, GeneratorBackend& backend,
                               const PromptLibrary& library, const PipelineConfig& config) {
  PipelineRun run;
  run.document = document;
  run.backend = backend.identity();
  run.seed = config.limits.seed;
  run.config_hash = util::fnv1a64_hex(to_json(config).dump());

  const auto& composition = document.composition;
  GenerationContext context{&library, model::function_table(library.examples), config.limits, config.repair_budget};
  check_budget(context);

  auto type_table = config.port_types;
  std::string fallback = "Real";
  if (auto it = type_table.find("*"); it != type_table.end()) {
    fallback = it->second;
    type_table.erase(it);
  }
  templ::StaticPortTypes types(type_table, fallback);

  auto corpus_text = [&](const doc::ComponentNode& node) {
    auto it = document.slice.component_corpora.find(node.name);
    if (it == document.slice.component_corpora.end()) return std::string();
    return join_lines(document.sentence_texts(it->second));
  };
  auto kind_of = [&](const doc::ComponentNode& node, const std::string& text) {
    std::vector<std::string> spellings{node.name};
    spellings.insert(spellings.end(), node.aliases.begin(), node.aliases.end());
    for (const auto& [component, kind] : config.kinds)
      for (const auto& s : spellings)
        if (model::normalize_name(component) == model::normalize_name(s))
          return kind == "continuous" ? UnitKind::Continuous : UnitKind::Discrete;
    auto low = lower(text);
    for (auto cue : kContinuousCues)
      if (low.find(cue) != std::string::npos) return UnitKind::Continuous;
    return UnitKind::Discrete;
  };

  // Couples in pre-order; leaves collected for filling.
  std::vector<Leaf> leaves;
  std::function<void(const doc::ComponentNode&)> visit = [&](const doc::ComponentNode& node) {
    doc::Lexicon children;
    for (const auto& c : node.children) {
      doc::LexiconEntry e{c.name, {c.name}};
      e.names.insert(e.names.end(), c.aliases.begin(), c.aliases.end());
      children.push_back(std::move(e));
    }
    std::vector<std::string> corpus;
    for (auto id : document.slice.connection_corpus)
      if (doc::mentioned_components(document.tagged[id], children).size() >= 2)
        corpus.push_back(document.tagged[id].text);

    bool complete = true;
    ConnectionResult connections;
    try {
      connections = infer_connections(corpus, node, backend, context);
      append_exchanges(run.transcript, connections.report);
    } catch (const UnparseableOutput& e) {
      append_exchanges(run.transcript, e.report());
      run.diagnostics.push_back(
          make_diag(Severity::Error, DiagCode::UnexpectedToken, e.what(), model::to_class_name(node.name)));
      complete = false;
    } catch (const BackendFailure& e) {
      run.diagnostics.push_back(
          make_diag(Severity::Error, DiagCode::Info, e.what(), model::to_class_name(node.name)));
      complete = false;
    }
    run.diagnostics.insert(run.diagnostics.end(), connections.diagnostics.begin(), connections.diagnostics.end());

    auto couple = templ::build_couple(node, connections.connections, &types);
    run.units.push_back({templ::close_holes(couple), couple, complete});
    const auto couple_connections = couple.filled.connections;

    for (const auto& child : node.children) {
      if (!child.children.empty()) continue;
      model::PartDecl part{model::to_class_name(child.name), model::to_instance_name(child.name), {}};
      auto ports = templ::extract_subsystem_ports(couple_connections, part.instance_name, types,
                                                  config.port_convention, &run.diagnostics);
      auto kind = kind_of(child, corpus_text(child));
      leaves.push_back({&child, &node, templ::make_atomic_skeleton(part, ports, kind)});
    }
    for (const auto& child : node.children)
      if (!child.children.empty()) visit(child);
  };
  visit(composition.root);

  // Hole fills, concurrently; each slot is written by one task only.
  std::vector<std::optional<FillResult>> fills(leaves.size());
  std::vector<RepairReport> failed(leaves.size());
  std::vector<std::string> failures(leaves.size());
  util::for_each_bounded(leaves.size(), config.max_in_flight, [&](std::size_t i) {
    const auto& leaf = leaves[i];
    auto hole = leaf.skeleton.kind == UnitKind::Discrete ? templ::Hole::State : templ::Hole::Equation;
    try {
      fills[i] = fill_hole(leaf.skeleton, hole, backend, corpus_text(*leaf.parent), corpus_text(*leaf.node), context);
    } catch (const Exhausted& e) {
      failed[i] = e.report();
      failures[i] = e.what();
    } catch (const BackendFailure& e) {
      failures[i] = e.what();
    }
  });

  const auto atomics_begin = run.units.size();
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const auto& leaf = leaves[i];
    if (fills[i]) {
      append_exchanges(run.transcript, fills[i]->report);
      run.units.push_back({std::move(fills[i]->unit), leaf.skeleton, true});
    } else {
      append_exchanges(run.transcript, failed[i]);
      run.diagnostics.push_back(make_diag(Severity::Error, DiagCode::MissingSection, failures[i],
                                          leaf.skeleton.filled.name));
      run.units.push_back({templ::close_holes(leaf.skeleton), leaf.skeleton, false});
    }
  }
  const auto atomics_end = run.units.size();

  // Functions the atomics call: library ones are copied, others generated.
  std::map<std::string, ModelUnit> functions;
  for (auto i = atomics_begin; i < atomics_end; ++i) {
    auto& generated = run.units[i];
    auto result = generate_missing_functions(generated.unit, backend, context);
    for (const auto& r : result.reports) append_exchanges(run.transcript, r);
    run.diagnostics.insert(run.diagnostics.end(), result.diagnostics.begin(), result.diagnostics.end());
    if (has_errors(result.diagnostics)) generated.complete = false;
    for (auto& fn : result.functions) {
      context.functions[fn.name] = fn.body->params.size();
      functions.emplace(fn.name, std::move(fn));
    }
    for (const auto& callee : model::called_functions(generated.unit)) {
      if (!functions.count(callee))
        for (const auto& ex : library.examples)
          if (ex.kind == UnitKind::Function && ex.name == callee) functions.emplace(callee, ex);
      if (functions.count(callee) && !generated.unit.imports_name(callee))
        generated.unit.imports.push_back({callee, {}});
    }
    std::sort(generated.unit.imports.begin(), generated.unit.imports.end(),
              [](const model::Import& a, const model::Import& b) { return a.name < b.name; });
  }
  for (auto& [name, fn] : functions) {
    auto skeleton = templ::make_function_skeleton(name, fn.body->params.size());
    run.units.push_back({model::strip_spans(std::move(fn)), std::move(skeleton), true});
  }

  auto linked = model::link_model_set(run.model_set());
  run.diagnostics.insert(run.diagnostics.end(), linked.diagnostics.begin(), linked.diagnostics.end());
  run.complete = linked.ok() && std::all_of(run.units.begin(), run.units.end(),
                                            [](const GeneratedUnit& u) { return u.complete; });
  return run;
}

PipelineRun run_pipeline(std::string_view document_text, const doc::DocPipelineOptions& doc_options,
                         GeneratorBackend& backend, const PromptLibrary& library, const PipelineConfig& config) {
  auto document = doc::run_doc_pipeline(document_text, doc_options);
  auto run = generate_model_set(document, backend, library, config);
  std::string input(document_text);
  for (const auto& e : doc_options.edits)
    input += fmt::format("\x1e{}\x1f{}\x1f{}", static_cast<int>(e.op), e.path, e.name);
  run.input_digest = util::fnv1a64_hex(input);
  return run;
}

nlohmann::ordered_json manifest_of(const PipelineRun& run) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["backend"] = run.backend;
  j["config_hash"] = run.config_hash;
  j["seed"] = run.seed;
  j["input_digest"] = run.input_digest;
  j["output_digest"] = run.output_digest();
  j["complete"] = run.complete;
  j["units"] = nlohmann::ordered_json::array();
  for (const auto& u : run.units)
    j["units"].push_back({{"name", u.unit.name},
                          {"kind", model::to_string(u.unit.kind)},
                          {"file", u.unit.name + ".x"},
                          {"complete", u.complete}});
  j["exchanges"] = run.transcript.size();
  j["diagnostics"] = nlohmann::ordered_json::array();
  for (const auto& d : run.diagnostics) j["diagnostics"].push_back(diag_json(d));
  return j;
}

void write_outputs(const PipelineRun& run, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  auto write = [&](const std::string& file, const std::string& text) {
    std::ofstream out(directory / file, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", (directory / file).string()));
    out << text;
  };
  for (const auto& u : run.units) write(u.unit.name + ".x", model::print_unit(u.unit));
  write("composition.json", doc::to_json(run.document.composition).dump(2) + "\n");
  std::string transcript;
  for (const auto& e : run.transcript) {
    nlohmann::ordered_json j;
    j["purpose"] = e.purpose;
    j["subject"] = e.subject;
    j["attempt"] = e.attempt;
    j["prompt_hash"] = e.prompt_hash;
    j["prompt"] = e.prompt;
    j["reply"] = e.reply;
    j["note_added"] = e.note_added;
    transcript += j.dump() + "\n";
  }
  write("transcript.jsonl", transcript);
  write("manifest.json", manifest_of(run).dump(2) + "\n");
}

}  // namespace xgen::gen
