#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgen/doc/composition.hpp"
#include "xgen/doc/corpus.hpp"
#include "xgen/doc/tagging.hpp"
#include "xgen/doc/text.hpp"
#include "xgen/model/diagnostics.hpp"

namespace xgen::doc {

struct DocPipelineOptions {
  std::vector<std::string> abbreviations = default_abbreviations();
  bool markdown = true;
  std::vector<CompositionEdit> edits;
  TaggerBackend* tagger = nullptr;          // rule tagger when null
  ClassifierBackend* classifier = nullptr;  // rule classifier when null
};

struct DocPipelineResult {
  std::vector<Sentence> sentences;
  std::vector<TaggedSentence> tagged;
  SystemComposition composition;
  CorpusSlice slice;
  std::vector<model::Diagnostic> diagnostics;
  std::string tagger;      // identity of the backend that produced the tags
  std::string classifier;
  std::vector<std::string> fallbacks;  // remote backends replaced by rules

  std::vector<std::string> sentence_texts(const std::vector<std::size_t>& ids) const;
};

/// Markdown stripping, sentence splitting, tagging, composition, edits,
/// classification against the edited composition, then slicing. A remote
/// backend that is unavailable is replaced by its rule counterpart and the
/// switch is recorded in `fallbacks`.
DocPipelineResult run_doc_pipeline(std::string_view document, const DocPipelineOptions& options = {});

nlohmann::ordered_json to_json(const DocPipelineResult& result);

}  // namespace xgen::doc
