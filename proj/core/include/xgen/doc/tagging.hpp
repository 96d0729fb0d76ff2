#pragma once

#include <chrono>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xgen::doc {

enum class EntityTag { Other = 0, Parent = 1, Subsystem = 2 };

struct Token {
  std::string text;
  std::size_t begin = 0;  // byte offsets into the sentence
  std::size_t end = 0;
  EntityTag tag = EntityTag::Other;

  friend bool operator==(const Token&, const Token&) = default;
};

enum class SentenceClass { Containment, ConnectionDesc, Irrelevant };

std::string_view to_string(SentenceClass c);
SentenceClass sentence_class_from_string(std::string_view text);  // throws invalid_argument

struct TaggedSentence {
  std::string text;
  std::vector<Token> tokens;
  std::set<SentenceClass> classes;

  bool has_tag(EntityTag tag) const;
  /// Maximal runs of tokens carrying `tag`, as sentence substrings.
  std::vector<std::string> spans(EntityTag tag) const;

  friend bool operator==(const TaggedSentence&, const TaggedSentence&) = default;
};

/// Word tokens (letters, digits, '_', and '-', '\'' or '.' between word
/// characters) and single-character punctuation tokens; whitespace is dropped.
std::vector<Token> tokenize(std::string_view text);

/// A component and every name it goes by in the document.
struct LexiconEntry {
  std::string component;
  std::vector<std::string> names;
};
using Lexicon = std::vector<LexiconEntry>;

/// Components of `lexicon` named in the sentence, in lexicon order. Names
/// match on consecutive word tokens, ignoring case, spacing and camel case.
std::vector<std::string> mentioned_components(const TaggedSentence& sentence, const Lexicon& lexicon);

class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TaggerBackend {
 public:
  virtual ~TaggerBackend() = default;
  virtual std::vector<TaggedSentence> tag(const std::vector<std::string>& sentences) = 0;
  virtual std::string identity() const = 0;
};

class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;
  virtual std::vector<std::set<SentenceClass>> classify(const std::vector<TaggedSentence>& sentences,
                                                        const Lexicon& lexicon) = 0;
  virtual std::string identity() const = 0;
};

/// Containment-verb patterns: the noun phrase before the verb is the parent,
/// the listed noun phrases after it are subsystems.
class RuleTagger : public TaggerBackend {
 public:
  std::vector<TaggedSentence> tag(const std::vector<std::string>& sentences) override;
  std::string identity() const override { return "rule"; }
};

/// Containment when both parent and subsystem tags are present;
/// ConnectionDesc when two components are named around a transfer verb;
/// no class for other sentences naming a component; Irrelevant otherwise.
class RuleClassifier : public ClassifierBackend {
 public:
  std::vector<std::set<SentenceClass>> classify(const std::vector<TaggedSentence>& sentences,
                                                const Lexicon& lexicon) override;
  std::string identity() const override { return "rule"; }
};

struct HttpBackendOptions {
  std::string url;
  std::size_t batch_size = 16;
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds timeout{10000};
};

/// POST {url}/tag {"sentences": [...]} -> {"tags": [[{"begin","end","tag"}...]...]}
/// with character-offset spans; spans are projected onto local tokens.
class HttpTagger : public TaggerBackend {
 public:
  explicit HttpTagger(HttpBackendOptions options) : options_(std::move(options)) {}
  std::vector<TaggedSentence> tag(const std::vector<std::string>& sentences) override;
  std::string identity() const override { return "http:" + options_.url; }

 private:
  HttpBackendOptions options_;
};

/// POST {url}/classify {"sentences": [...]} -> {"classes": [["Containment"...]...]}
class HttpClassifier : public ClassifierBackend {
 public:
  explicit HttpClassifier(HttpBackendOptions options) : options_(std::move(options)) {}
  std::vector<std::set<SentenceClass>> classify(const std::vector<TaggedSentence>& sentences,
                                                const Lexicon& lexicon) override;
  std::string identity() const override { return "http:" + options_.url; }

 private:
  HttpBackendOptions options_;
};

TaggedSentence tag_tokens(std::string_view sentence, TaggerBackend& backend);

}  // namespace xgen::doc
