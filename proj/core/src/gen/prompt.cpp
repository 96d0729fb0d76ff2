#include "xgen/gen/prompt.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "xgen/model/printer.hpp"
#include "xgen/util/hash.hpp"

namespace xgen::gen {

using model::UnitKind;

const std::string_view kStateInstruction =
    "Drawing on the textual descriptions of both the system model and the subsystem model, please develop the "
    "code for the keyword State of the discrete class subsystem model in accordance with the modeling "
    "specifications for the keyword State and the preceding code parts of the discrete class model. Note that "
    "only the code of the keyword State should be included in your output.";

const std::string_view kEquationInstruction =
    "Using the textual descriptions of the system model and of the subsystem model, write the keyword Value and "
    "keyword Equation code of the continuous class subsystem model so that it follows the equation rules given "
    "above and the code already generated for this continuous class model. Output only the value and equation "
    "sections.";

const std::string_view kAugmentationTask =
    "Generate a couple/continuous/discrete simulation model of X language based on the model described in the "
    "aforementioned Input component.";

namespace {

constexpr std::string_view kBnf = R"bnf(<model-set>   ::= <unit>*
<unit>        ::= <couple> | <discrete> | <continuous> | <function>
<couple>      ::= "couple" <Name> <import>* <section>* "end;"
<discrete>    ::= "discrete" <Name> <import>* <section>* "end;"
<continuous>  ::= "continuous" <Name> <import>* <section>* "end;"
<function>    ::= "function" <name> "(" [<param> ("," <param>)*] ")" <statement>* "end;"
<import>      ::= "import" <Name> ";"
<section>     ::= "part:" <part>* | "parameter:" <binding>* | "value:" <binding>*
                | "port:" <port>* | "connection:" <connect>* | "state:" <state>+
                | "equation:" <equation>*
<part>        ::= <Name> <name> ";"
<binding>     ::= <type> <name> ["=" <literal>] ";"
<port>        ::= ["input" | "output"] <type> <name> ["=" <literal>] ";"
<connect>     ::= "connect(" <endpoint> "," <endpoint> ");"
<endpoint>    ::= <name> "." <name> | <name>
<state>       ::= ["initial"] "state" <Name> <when>* "end;"
<when>        ::= "when" <expr> "then" <statement>* "end;"
<statement>   ::= <name> "=" <expr> ";" | "statehold(" <expr> ");" | "transform(" <Name> ");"
                | "if" <expr> "then" <statement>* ["else" <statement>*] "end;" | "return" <expr> ";"
<equation>    ::= ["der(" <name> ")" | <name>] "=" <expr> ";"
<type>        ::= "Real" | "Int" | "Bool" | "String"
<expr>        ::= arithmetic, comparison and logical operators over literals, names and calls;
                  "entry()" and "timeout()" are event conditions)bnf";

constexpr std::string_view kStateSpec =
    "The state section of a discrete class lists the states of the model. Exactly one state is marked "
    "initial. Each state holds `when <condition> then ... end;` blocks. `when entry() then` runs when the "
    "state is entered and may call `statehold(T)` to schedule an internal event after T time units. "
    "`when timeout() then` runs when that time has elapsed. Other conditions react to input ports. "
    "Statements assign values and output ports, and `transform(S);` moves to state S. Examples of the "
    "value and state sections follow.";

constexpr std::string_view kStateResponse =
    "Understood. A state section is a list of named states, one of them initial, each made of when-blocks. "
    "Entry blocks set outputs and the hold time, timeout blocks fire when the hold time expires, and input "
    "conditions fire when ports change. Transitions use transform. I will return only the value and state "
    "sections.";

constexpr std::string_view kEquationSpec =
    "The equation section of a continuous class holds one equation per line. `der(x) = expr;` gives the "
    "rate of change of a value x and is integrated over time. `y = expr;` computes an output port or value "
    "algebraically from values, parameters, input ports and `time`. Every output port is defined by exactly "
    "one equation. Examples of the value and equation sections follow.";

constexpr std::string_view kEquationResponse =
    "Understood. Values integrated with der() carry the state, algebraic equations compute the outputs from "
    "them, and each output port is assigned once. I will return only the value and equation sections.";

constexpr std::string_view kConnectionInstruction =
    "From the system composition and the sentences describing how its subsystems exchange signals, list the "
    "connections of the couple class model. Write one connection per line as `connect(Source.port, "
    "Target.port)`, with the data flowing from the first endpoint to the second. Use only the subsystem names "
    "listed. Output nothing else.";

constexpr std::string_view kFunctionInstruction =
    "The atomic class model below calls a function that is not defined yet. Write the function class model "
    "of X language for it, starting with `function` and ending with `end;`. Use the parameter count seen at "
    "the call sites. Output only the function.";

constexpr std::string_view kAugmentationIntroduction =
    "X language describes simulation models as couple, discrete, continuous and function classes. Its "
    "grammar and some models from the model library follow.";

std::string_view kind_word(UnitKind kind) {
  switch (kind) {
    case UnitKind::Couple: return "couple";
    case UnitKind::Discrete: return "discrete";
    case UnitKind::Continuous: return "continuous";
    case UnitKind::Function: return "function";
  }
  return "";
}

std::string example_sections(const model::ModelUnit& unit) {
  return model::print_section(unit, "value") +
         model::print_section(unit, unit.kind == UnitKind::Discrete ? "state" : "equation");
}

void add(PromptBundle& b, Role role, PromptLabel label, std::string content) {
  b.messages.push_back({role, label, std::move(content)});
}

void add_notes(PromptBundle& b, const std::vector<std::string>& notes) {
  if (notes.empty()) return;
  std::string joined;
  for (std::size_t i = 0; i < notes.size(); ++i) joined += (i ? "\n" : "") + notes[i];
  add(b, Role::User, PromptLabel::Note, std::move(joined));
}

}  // namespace

std::string_view to_string(Role role) { return role == Role::System ? "system" : "user"; }

std::string_view to_string(PromptLabel label) {
  switch (label) {
    case PromptLabel::BNF: return "BNF";
    case PromptLabel::StateSpec: return "StateSpec";
    case PromptLabel::StateResponse: return "StateResponse";
    case PromptLabel::Introduction: return "Introduction";
    case PromptLabel::CoupleText: return "CoupleText";
    case PromptLabel::AtomicText: return "AtomicText";
    case PromptLabel::GeneratedCode: return "GeneratedCode";
    case PromptLabel::Note: return "Note";
    case PromptLabel::Input: return "Input";
    case PromptLabel::Task: return "Task";
  }
  return "";
}

const PromptMessage* PromptBundle::find(PromptLabel label) const {
  for (const auto& m : messages)
    if (m.label == label) return &m;
  return nullptr;
}

std::string PromptBundle::hash() const {
  std::string canonical;
  for (const auto& m : messages) {
    canonical += to_string(m.role);
    canonical += '\x1f';
    canonical += to_string(m.label);
    canonical += '\x1f';
    canonical += m.content;
    canonical += '\x1e';
  }
  return util::fnv1a64_hex(canonical);
}

std::string PromptBundle::render() const {
  std::string out;
  for (const auto& m : messages) {
    out += fmt::format("### {} [{}]\n", to_string(m.label), to_string(m.role));
    out += m.content;
    if (!m.content.empty() && m.content.back() != '\n') out += '\n';
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json to_json(const PromptBundle& bundle) {
  nlohmann::ordered_json j;
  j["purpose"] = bundle.purpose;
  j["subject"] = bundle.subject;
  j["hash"] = bundle.hash();
  j["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : bundle.messages)
    j["messages"].push_back({{"role", to_string(m.role)}, {"label", to_string(m.label)}, {"content", m.content}});
  return j;
}

PromptLibrary PromptLibrary::standard(std::vector<model::ModelUnit> examples) {
  PromptLibrary lib;
  lib.bnf = kBnf;
  lib.state_spec = kStateSpec;
  lib.state_response = kStateResponse;
  lib.equation_spec = kEquationSpec;
  lib.equation_response = kEquationResponse;
  std::sort(examples.begin(), examples.end(),
            [](const model::ModelUnit& a, const model::ModelUnit& b) { return a.name < b.name; });
  lib.examples = std::move(examples);
  return lib;
}

std::vector<const model::ModelUnit*> PromptLibrary::pick_examples(UnitKind kind, std::string_view exclude) const {
  std::vector<const model::ModelUnit*> out;
  for (const auto& u : examples) {
    if (out.size() >= few_shot) break;
    if (u.kind == kind && u.name != exclude) out.push_back(&u);
  }
  return out;
}

PromptBundle build_state_prompt(std::string_view couple_text, std::string_view atomic_text,
                                const templ::TemplateInstance& skeleton, const std::vector<std::string>& notes,
                                const PromptLibrary& library) {
  const bool discrete = skeleton.kind == UnitKind::Discrete;
  if (!discrete && skeleton.kind != UnitKind::Continuous)
    throw std::invalid_argument("state prompts are built for discrete or continuous skeletons");
  if (!skeleton.holes.count(discrete ? templ::Hole::State : templ::Hole::Equation))
    throw std::invalid_argument(fmt::format("skeleton '{}' has no {} hole", skeleton.filled.name,
                                            discrete ? "state" : "equation"));
  PromptBundle b;
  b.purpose = discrete ? "state" : "equation";
  b.subject = skeleton.filled.name;

  std::string spec(discrete ? library.state_spec : library.equation_spec);
  for (const auto* ex : library.pick_examples(skeleton.kind, skeleton.filled.name))
    spec += fmt::format("\n\nExample ({}):\n{}", ex->name, example_sections(*ex));
  add(b, Role::User, PromptLabel::BNF, library.bnf);
  add(b, Role::User, PromptLabel::StateSpec, std::move(spec));
  add(b, Role::System, PromptLabel::StateResponse, discrete ? library.state_response : library.equation_response);
  add(b, Role::User, PromptLabel::Introduction,
      std::string(discrete ? kStateInstruction : kEquationInstruction));
  add(b, Role::User, PromptLabel::CoupleText, std::string(couple_text));
  add(b, Role::User, PromptLabel::AtomicText, std::string(atomic_text));
  add(b, Role::User, PromptLabel::GeneratedCode, model::print_unit(skeleton.filled));
  add_notes(b, notes);
  return b;
}

PromptBundle build_connection_prompt(std::string_view system, const std::vector<std::string>& subsystems,
                                     const std::vector<std::string>& connection_corpus,
                                     const std::vector<std::string>& notes, const PromptLibrary&) {
  PromptBundle b;
  b.purpose = "connections";
  b.subject = std::string(system);
  add(b, Role::User, PromptLabel::Introduction, std::string(kConnectionInstruction));
  std::string composition = fmt::format("System: {}\nSubsystems:", system);
  for (const auto& s : subsystems) composition += "\n- " + s;
  add(b, Role::User, PromptLabel::CoupleText, std::move(composition));
  std::string corpus;
  for (const auto& s : connection_corpus) corpus += s + "\n";
  add(b, Role::User, PromptLabel::Input, std::move(corpus));
  add_notes(b, notes);
  return b;
}

PromptBundle build_function_prompt(std::string_view name, std::size_t arity, const model::ModelUnit& caller,
                                   const std::vector<std::string>& notes, const PromptLibrary& library) {
  PromptBundle b;
  b.purpose = "function";
  b.subject = std::string(name);
  add(b, Role::User, PromptLabel::BNF, library.bnf);
  add(b, Role::User, PromptLabel::Introduction, std::string(kFunctionInstruction));
  add(b, Role::User, PromptLabel::GeneratedCode, model::print_unit(caller));
  add(b, Role::User, PromptLabel::Task, fmt::format("Function name: {}\nParameter count: {}", name, arity));
  add_notes(b, notes);
  return b;
}

PromptBundle build_augmentation_prompt(std::string_view model_description,
                                       const std::vector<model::ModelUnit>& examples, UnitKind kind,
                                       const PromptLibrary& library) {
  if (examples.empty()) throw FewShotRequired();
  PromptBundle b;
  b.purpose = "augment";
  b.subject = std::string(kind_word(kind));
  std::string intro = fmt::format("{}\n\n{}", kAugmentationIntroduction, library.bnf);
  for (const auto& ex : examples) intro += "\n\n" + model::print_unit(ex);
  add(b, Role::User, PromptLabel::Introduction, std::move(intro));
  add(b, Role::User, PromptLabel::Input, std::string(model_description));
  add(b, Role::User, PromptLabel::Task, fmt::format("{}\nRequested class: {}", kAugmentationTask, kind_word(kind)));
  return b;
}

}  // namespace xgen::gen
