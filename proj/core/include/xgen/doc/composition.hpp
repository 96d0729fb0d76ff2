#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgen/doc/tagging.hpp"
#include "xgen/model/diagnostics.hpp"

namespace xgen::doc {

struct ComponentNode {
  std::string name;  // display form, e.g. "power supply"
  std::vector<ComponentNode> children;
  std::vector<std::size_t> provenance;  // sentence ids; empty for manual edits
  bool manual = false;                  // created or renamed by an edit
  std::vector<std::string> aliases;     // other spellings and former names

  const ComponentNode* find_child(std::string_view name) const;
  ComponentNode* find_child(std::string_view name);

  friend bool operator==(const ComponentNode&, const ComponentNode&) = default;
};

struct SystemComposition {
  ComponentNode root;
  bool synthetic_root = false;  // several top-level systems joined

  /// Node at a "/"-separated path of normalized names below the root;
  /// the empty path is the root.
  const ComponentNode* find(std::string_view path) const;
  ComponentNode* find(std::string_view path);

  friend bool operator==(const SystemComposition&, const SystemComposition&) = default;
};

class CycleDetected : public std::runtime_error {
 public:
  explicit CycleDetected(std::vector<std::string> path);
  const std::vector<std::string>& path() const { return path_; }

 private:
  std::vector<std::string> path_;
};

class NoRelations : public std::runtime_error {
 public:
  NoRelations() : std::runtime_error("no sentence names both a parent system and a subsystem") {}
};

/// Aggregates parent/subsystem spans across sentences. Names merge when
/// their normalized forms agree; the display name is the lexicographically
/// smallest spelling and the others become aliases. Children are ordered by
/// normalized name. Several top-level systems are joined under a synthetic
/// root, reported through `diagnostics`.
SystemComposition build_composition(const std::vector<TaggedSentence>& tagged,
                                    std::vector<model::Diagnostic>* diagnostics = nullptr);

enum class EditOp { Add, Remove, Rename };

/// add: new child `name` under `path`; remove: drop `path`; rename: `path`
/// becomes `name`, keeping the old name as an alias.
struct CompositionEdit {
  EditOp op = EditOp::Add;
  std::string path;
  std::string name;
};

class EditError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON list of {"op": "add"|"remove"|"rename", "path": "...", "name": "..."}.
std::vector<CompositionEdit> parse_edits(std::string_view json_text);
void apply_edits(SystemComposition& composition, const std::vector<CompositionEdit>& edits);

/// Every node with its name and aliases, in depth-first order.
Lexicon lexicon_of(const SystemComposition& composition);

nlohmann::ordered_json to_json(const ComponentNode& node);
nlohmann::ordered_json to_json(const SystemComposition& composition);
SystemComposition composition_from_json(const nlohmann::json& doc);

}  // namespace xgen::doc
