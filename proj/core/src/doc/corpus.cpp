#include "xgen/doc/corpus.hpp"

namespace xgen::doc {

CorpusSlice slice_corpus(const std::vector<TaggedSentence>& tagged, const SystemComposition& composition) {
  CorpusSlice out;
  auto lexicon = lexicon_of(composition);
  for (const auto& entry : lexicon) out.component_corpora[entry.component];
  for (std::size_t id = 0; id < tagged.size(); ++id) {
    const auto& classes = tagged[id].classes;
    if (classes.size() == 1 && classes.count(SentenceClass::Irrelevant)) continue;
    out.model_corpus.push_back(id);
    if (classes.count(SentenceClass::ConnectionDesc)) out.connection_corpus.push_back(id);
    for (const auto& component : mentioned_components(tagged[id], lexicon))
      out.component_corpora[component].push_back(id);
  }
  return out;
}

nlohmann::ordered_json to_json(const CorpusSlice& slice) {
  nlohmann::ordered_json j;
  j["model_corpus"] = slice.model_corpus;
  j["connection_corpus"] = slice.connection_corpus;
  j["component_corpora"] = nlohmann::ordered_json::object();
  for (const auto& [name, ids] : slice.component_corpora) j["component_corpora"][name] = ids;
  return j;
}

}  // namespace xgen::doc
