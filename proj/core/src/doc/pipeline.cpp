#include "xgen/doc/pipeline.hpp"

#include <fmt/format.h>

namespace xgen::doc {

std::vector<std::string> DocPipelineResult::sentence_texts(const std::vector<std::size_t>& ids) const {
  std::vector<std::string> out;
  for (auto id : ids) out.push_back(sentences.at(id).text);
  return out;
}

DocPipelineResult run_doc_pipeline(std::string_view document, const DocPipelineOptions& options) {
  DocPipelineResult out;
  std::string plain = options.markdown ? strip_markdown(document) : std::string(document);
  out.sentences = split_sentences(plain, options.abbreviations);
  std::vector<std::string> texts;
  for (const auto& s : out.sentences) texts.push_back(s.text);

  RuleTagger rule_tagger;
  TaggerBackend* tagger = options.tagger ? options.tagger : &rule_tagger;
  try {
    out.tagged = tagger->tag(texts);
  } catch (const BackendUnavailable& e) {
    out.fallbacks.push_back(fmt::format("tagger {} unavailable ({}); used rule tagger", tagger->identity(), e.what()));
    tagger = &rule_tagger;
    out.tagged = tagger->tag(texts);
  }
  out.tagger = tagger->identity();

  out.composition = build_composition(out.tagged, &out.diagnostics);
  apply_edits(out.composition, options.edits);

  auto lexicon = lexicon_of(out.composition);
  RuleClassifier rule_classifier;
  ClassifierBackend* classifier = options.classifier ? options.classifier : &rule_classifier;
  std::vector<std::set<SentenceClass>> classes;
  try {
    classes = classifier->classify(out.tagged, lexicon);
  } catch (const BackendUnavailable& e) {
    out.fallbacks.push_back(
        fmt::format("classifier {} unavailable ({}); used rule classifier", classifier->identity(), e.what()));
    classifier = &rule_classifier;
    classes = classifier->classify(out.tagged, lexicon);
  }
  out.classifier = classifier->identity();
  for (std::size_t i = 0; i < out.tagged.size(); ++i) out.tagged[i].classes = classes.at(i);

  out.slice = slice_corpus(out.tagged, out.composition);
  return out;
}

nlohmann::ordered_json to_json(const DocPipelineResult& result) {
  nlohmann::ordered_json j;
  j["tagger"] = result.tagger;
  j["classifier"] = result.classifier;
  j["fallbacks"] = result.fallbacks;
  j["sentences"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < result.tagged.size(); ++i) {
    const auto& t = result.tagged[i];
    nlohmann::ordered_json s;
    s["id"] = i;
    s["text"] = t.text;
    s["classes"] = nlohmann::ordered_json::array();
    for (auto c : t.classes) s["classes"].push_back(std::string(to_string(c)));
    s["parents"] = t.spans(EntityTag::Parent);
    s["subsystems"] = t.spans(EntityTag::Subsystem);
    j["sentences"].push_back(std::move(s));
  }
  j["composition"] = to_json(result.composition);
  j["slice"] = to_json(result.slice);
  j["diagnostics"] = nlohmann::ordered_json::parse(model::diagnostics_to_json(result.diagnostics));
  return j;
}

}  // namespace xgen::doc
