#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgen/doc/composition.hpp"
#include "xgen/doc/pipeline.hpp"
#include "xgen/gen/backend.hpp"
#include "xgen/gen/prompt.hpp"
#include "xgen/gen/repair.hpp"
#include "xgen/model/ast.hpp"
#include "xgen/model/diagnostics.hpp"
#include "xgen/model/linker.hpp"
#include "xgen/templ/template.hpp"

namespace xgen::gen {

inline constexpr std::string_view kVersion = "0.3.0";

/// Shared inputs of every prompt in a run.
struct GenerationContext {
  const PromptLibrary* library = nullptr;
  /// Functions callable without generation (library and already generated).
  model::FunctionTable functions;
  GenerationLimits limits;
  std::size_t repair_budget = 3;  // attempts per prompt, >= 1
};

struct FillResult {
  model::ModelUnit unit;
  RepairReport report;
};

/// Prompts for the hole (State for discrete, Equation for continuous), splices
/// the extracted code and checks it: it must parse, supply the hole's section
/// and use only declared names. Each failure appends one note and re-asks.
/// Throws Exhausted when `context.repair_budget` attempts fail.
FillResult fill_hole(const templ::TemplateInstance& skeleton, templ::Hole hole, GeneratorBackend& backend,
                     std::string_view couple_text, std::string_view atomic_text,
                     const GenerationContext& context);

struct ConnectionResult {
  std::vector<model::Connection> connections;  // endpoints use instance names
  std::vector<model::Diagnostic> diagnostics;
  RepairReport report;
};

/// Connections between the children of `system` inferred from the corpus.
/// Endpoints naming no child are dropped with an UnknownPart warning. An empty
/// corpus yields no connections and a warning without calling the backend.
/// Throws UnparseableOutput once the repair budget is spent.
ConnectionResult infer_connections(const std::vector<std::string>& connection_corpus,
                                   const doc::ComponentNode& system, GeneratorBackend& backend,
                                   const GenerationContext& context);

struct FunctionResult {
  std::vector<model::ModelUnit> functions;  // sorted by name
  std::vector<model::Diagnostic> diagnostics;
  std::vector<RepairReport> reports;
};

/// One function unit per callee of `unit` that is neither builtin nor in
/// `context.functions`, with the arity seen at the call sites. Callees of the
/// generated functions are not generated in turn; they are reported instead.
FunctionResult generate_missing_functions(const model::ModelUnit& unit, GeneratorBackend& backend,
                                          const GenerationContext& context);

struct PipelineConfig {
  std::size_t repair_budget = 3;
  std::size_t max_in_flight = 4;
  templ::PortConvention port_convention = templ::PortConvention::Dataflow;
  /// Component (any spelling) -> "discrete" | "continuous".
  std::map<std::string, std::string> kinds;
  /// "part.port" or "port" -> type, "*" -> fallback.
  std::map<std::string, std::string> port_types;
  GenerationLimits limits;
};

nlohmann::ordered_json to_json(const PipelineConfig& config);
/// Rejects unknown keys and malformed values with std::invalid_argument.
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc);

/// One prompt/response exchange, in run order.
struct Exchange {
  std::string purpose;
  std::string subject;
  std::size_t attempt = 0;
  std::string prompt_hash;
  std::string prompt;  // rendered
  std::string reply;
  std::string note_added;
};

struct GeneratedUnit {
  model::ModelUnit unit;
  templ::TemplateInstance skeleton;  // before filling
  bool complete = true;              // every hole filled by an accepted reply
};

struct PipelineRun {
  doc::DocPipelineResult document;
  std::vector<GeneratedUnit> units;  // couples first, then atomics, then functions
  std::vector<Exchange> transcript;
  std::vector<model::Diagnostic> diagnostics;
  std::string backend;
  std::string config_hash;
  std::string input_digest;
  std::uint64_t seed = 0;
  bool complete = true;

  std::vector<model::ModelUnit> model_set() const;
  /// FNV-1a over the printed units in order.
  std::string output_digest() const;
};

/// Couples for every node with children, atomics for the leaves, then any
/// functions the atomics call. Hole fills run concurrently, at most
/// `config.max_in_flight` at a time; results do not depend on scheduling.
PipelineRun generate_model_set(const doc::DocPipelineResult& document, GeneratorBackend& backend,
                               const PromptLibrary& library, const PipelineConfig& config);

/// Document pipeline followed by generate_model_set.
PipelineRun run_pipeline(std::string_view document_text, const doc::DocPipelineOptions& doc_options,
                         GeneratorBackend& backend, const PromptLibrary& library, const PipelineConfig& config);

nlohmann::ordered_json manifest_of(const PipelineRun& run);

/// `<Unit>.x` per unit, composition.json, transcript.jsonl and manifest.json.
void write_outputs(const PipelineRun& run, const std::filesystem::path& directory);

}  // namespace xgen::gen
