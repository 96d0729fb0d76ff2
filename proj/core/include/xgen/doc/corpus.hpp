#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgen/doc/composition.hpp"
#include "xgen/doc/tagging.hpp"

namespace xgen::doc {

struct CorpusSlice {
  std::vector<std::size_t> model_corpus;       // sentence ids that are not Irrelevant-only
  std::vector<std::size_t> connection_corpus;  // ConnectionDesc sentences
  std::map<std::string, std::vector<std::size_t>> component_corpora;  // component -> sentences naming it

  friend bool operator==(const CorpusSlice&, const CorpusSlice&) = default;
};

/// Sentence ids are indices into `tagged`; classes must already be set.
CorpusSlice slice_corpus(const std::vector<TaggedSentence>& tagged, const SystemComposition& composition);

nlohmann::ordered_json to_json(const CorpusSlice& slice);

}  // namespace xgen::doc
