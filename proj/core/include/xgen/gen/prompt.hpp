#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgen/model/ast.hpp"
#include "xgen/templ/template.hpp"

namespace xgen::gen {

enum class Role { User, System };

enum class PromptLabel {
  BNF,
  StateSpec,
  StateResponse,
  Introduction,
  CoupleText,
  AtomicText,
  GeneratedCode,
  Note,
  Input,
  Task,
};

std::string_view to_string(Role role);
std::string_view to_string(PromptLabel label);

struct PromptMessage {
  Role role = Role::User;
  PromptLabel label = PromptLabel::Introduction;
  std::string content;

  friend bool operator==(const PromptMessage&, const PromptMessage&) = default;
};

struct PromptBundle {
  std::vector<PromptMessage> messages;
  /// Routing metadata, not sent to backends: "state", "equation",
  /// "connections", "function" or "augment", and the unit or system concerned.
  std::string purpose;
  std::string subject;

  const PromptMessage* find(PromptLabel label) const;
  /// FNV-1a of roles, labels and contents; keys replay files.
  std::string hash() const;
  /// Human-readable transcript.
  std::string render() const;

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

nlohmann::ordered_json to_json(const PromptBundle& bundle);

/// Instruction placed in the Introduction message of state prompts.
extern const std::string_view kStateInstruction;
/// Continuous-class counterpart of kStateInstruction.
extern const std::string_view kEquationInstruction;
/// Task message of augmentation prompts.
extern const std::string_view kAugmentationTask;

/// Read-only material shared by every prompt of a run.
struct PromptLibrary {
  std::string bnf;
  std::string state_spec;
  std::string state_response;
  std::string equation_spec;
  std::string equation_response;
  std::vector<model::ModelUnit> examples;  // few-shot sources
  std::size_t few_shot = 2;

  /// Built-in grammar and section descriptions over `examples`.
  static PromptLibrary standard(std::vector<model::ModelUnit> examples = {});
  /// Up to `few_shot` examples of `kind`, by name, skipping `exclude`.
  std::vector<const model::ModelUnit*> pick_examples(model::UnitKind kind, std::string_view exclude) const;
};

class FewShotRequired : public std::invalid_argument {
 public:
  FewShotRequired() : std::invalid_argument("at least one example unit is required") {}
};

/// Value/state (discrete) or value/equation (continuous) prompt in the
/// eight-row order BNF, StateSpec, StateResponse, Introduction, CoupleText,
/// AtomicText, GeneratedCode, Note. GeneratedCode is the skeleton without
/// hole markers; Note is present only when `notes` is non-empty and joins
/// them with newlines.
PromptBundle build_state_prompt(std::string_view couple_text, std::string_view atomic_text,
                                const templ::TemplateInstance& skeleton, const std::vector<std::string>& notes,
                                const PromptLibrary& library);

/// Asks for `connect(A.p, B.q)` lines between the listed subsystems.
PromptBundle build_connection_prompt(std::string_view system, const std::vector<std::string>& subsystems,
                                     const std::vector<std::string>& connection_corpus,
                                     const std::vector<std::string>& notes, const PromptLibrary& library);

/// Asks for the function unit `name` called by `caller`.
PromptBundle build_function_prompt(std::string_view name, std::size_t arity, const model::ModelUnit& caller,
                                   const std::vector<std::string>& notes, const PromptLibrary& library);

/// Introduction (grammar plus printed examples), Input, Task.
/// Throws FewShotRequired when `examples` is empty.
PromptBundle build_augmentation_prompt(std::string_view model_description,
                                       const std::vector<model::ModelUnit>& examples, model::UnitKind kind,
                                       const PromptLibrary& library);

}  // namespace xgen::gen
