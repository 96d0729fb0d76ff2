#include "xgen/doc/tagging.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "xgen/model/names.hpp"
#include "xgen/util/bounded.hpp"
#include "xgen/util/http.hpp"

namespace xgen::doc {

namespace {

bool word_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || u >= 0x80;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_word(const Token& t) { return !t.text.empty() && word_char(t.text.front()); }

const std::vector<std::vector<std::string>>& containment_verbs() {
  static const std::vector<std::vector<std::string>> verbs = {
      {"comprises"}, {"comprise"},         {"consists", "of"},         {"consist", "of"},
      {"contains"},  {"contain"},          {"is", "composed", "of"},   {"are", "composed", "of"},
  };
  return verbs;
}

bool leading_filler(const std::string& w) {
  static const std::set<std::string> words = {
      "the",   "a",     "an",      "its",     "their",    "this",    "these", "that",  "those",
      "each",  "every", "our",     "one",     "two",      "three",   "four",  "five",  "six",
      "seven", "eight", "nine",    "ten",     "several",  "various", "some",  "both",  "multiple",
      "many",  "other", "further", "additional", "separate"};
  if (words.count(w)) return true;
  return std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool list_stop(const std::string& w) {
  static const std::set<std::string> words = {"which", "that",  "who",  "whose", "where", "while",
                                              "to",    "for",   "with", "in",    "on",    "at",
                                              "by",    "from",  "under", "inside", "within", "via"};
  return words.count(w) > 0;
}

bool list_separator(const Token& t, const std::string& w) {
  return t.text == "," || t.text == ";" || w == "and" || w == "or" || w == "plus";
}

void tag_containment(std::vector<Token>& tokens) {
  std::vector<std::string> words;
  for (const auto& t : tokens) words.push_back(lower(t.text));

  std::size_t verb = tokens.size(), verb_len = 0;
  for (std::size_t i = 0; i < tokens.size() && verb == tokens.size(); ++i)
    for (const auto& pattern : containment_verbs()) {
      if (i + pattern.size() > words.size()) continue;
      if (std::equal(pattern.begin(), pattern.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
        verb = i;
        verb_len = pattern.size();
        break;
      }
    }
  if (verb == tokens.size()) return;

  std::size_t first = verb;
  while (first > 0 && is_word(tokens[first - 1])) --first;
  while (first + 1 < verb && leading_filler(words[first])) ++first;
  if (first == verb) return;

  std::size_t end = verb + verb_len;
  while (end < tokens.size() && tokens[end].text != "." && tokens[end].text != "!" && tokens[end].text != "?")
    ++end;
  std::size_t start = verb + verb_len;
  for (std::size_t i = start; i < end; ++i)
    if (tokens[i].text == ":") {
      start = i + 1;
      break;
    }

  std::vector<std::size_t> item;
  bool any = false;
  auto flush = [&] {
    std::size_t k = 0;
    while (k + 1 < item.size() && leading_filler(words[item[k]])) ++k;
    for (; k < item.size(); ++k) {
      tokens[item[k]].tag = EntityTag::Subsystem;
      any = true;
    }
    item.clear();
  };
  int depth = 0;
  for (std::size_t i = start; i < end; ++i) {
    const auto& t = tokens[i];
    if (t.text == "(") ++depth;
    if (depth > 0) {
      if (t.text == ")") --depth;
      flush();
      continue;
    }
    if (list_stop(words[i])) break;
    if (list_separator(t, words[i]) || !is_word(t)) {
      flush();
      continue;
    }
    item.push_back(i);
  }
  flush();
  if (!any) return;
  for (std::size_t i = first; i < verb; ++i) tokens[i].tag = EntityTag::Parent;
}

struct Mention {
  std::size_t start;
  std::size_t length;
  std::size_t entry;
};

std::vector<Mention> find_mentions(const TaggedSentence& sentence, const Lexicon& lexicon) {
  std::vector<std::size_t> word_index;
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i)
    if (is_word(sentence.tokens[i])) {
      word_index.push_back(i);
      keys.push_back(model::normalize_name(sentence.tokens[i].text));
    }
  std::vector<Mention> candidates;
  for (std::size_t e = 0; e < lexicon.size(); ++e)
    for (const auto& name : lexicon[e].names) {
      auto key = model::normalize_name(name);
      if (key.empty()) continue;
      for (std::size_t i = 0; i < keys.size(); ++i) {
        std::string joined;
        for (std::size_t j = i; j < keys.size(); ++j) {
          joined += keys[j];
          if (joined.size() > key.size() || key.compare(0, joined.size(), joined) != 0) break;
          if (joined == key) {
            candidates.push_back({i, j - i + 1, e});
            break;
          }
        }
      }
    }
  std::sort(candidates.begin(), candidates.end(), [](const Mention& a, const Mention& b) {
    return std::tie(b.length, a.start, a.entry) < std::tie(a.length, b.start, b.entry);
  });
  std::vector<bool> covered(keys.size(), false);
  std::vector<Mention> accepted;
  for (const auto& m : candidates) {
    bool free = true;
    for (std::size_t k = m.start; k < m.start + m.length; ++k) free = free && !covered[k];
    if (!free) continue;
    for (std::size_t k = m.start; k < m.start + m.length; ++k) covered[k] = true;
    accepted.push_back({word_index[m.start], m.length, m.entry});
  }
  return accepted;
}

bool transfer_cue(const std::string& word) {
  static const std::vector<std::string> stems = {"feed",    "fed",   "send",    "sent",  "suppl",   "provid",
                                                 "deliver", "transmit", "forward", "pass", "report", "return",
                                                 "receiv",  "driv",  "connect", "rout",  "relay",   "output"};
  for (const auto& s : stems)
    if (word.compare(0, s.size(), s) == 0) return true;
  return false;
}

std::vector<std::vector<std::string>> batches(const std::vector<std::string>& items, std::size_t size) {
  std::vector<std::vector<std::string>> out;
  size = std::max<std::size_t>(1, size);
  for (std::size_t i = 0; i < items.size(); i += size)
    out.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(i),
                     items.begin() + static_cast<std::ptrdiff_t>(std::min(items.size(), i + size)));
  return out;
}

// Posts each batch concurrently and returns the replies in batch order.
std::vector<nlohmann::json> post_batches(const HttpBackendOptions& options, std::string_view path,
                                         const std::vector<std::vector<std::string>>& parts) {
  std::vector<nlohmann::json> replies(parts.size());
  try {
    util::for_each_bounded(parts.size(), options.max_in_flight, [&](std::size_t i) {
      replies[i] = util::post_json(options.url, path, {{"sentences", parts[i]}}, options.timeout);
    });
  } catch (const util::HttpError& e) {
    throw BackendUnavailable(e.what());
  }
  return replies;
}

}  // namespace

std::string_view to_string(SentenceClass c) {
  switch (c) {
    case SentenceClass::Containment: return "Containment";
    case SentenceClass::ConnectionDesc: return "ConnectionDesc";
    case SentenceClass::Irrelevant: return "Irrelevant";
  }
  return "";
}

SentenceClass sentence_class_from_string(std::string_view text) {
  for (auto c : {SentenceClass::Containment, SentenceClass::ConnectionDesc, SentenceClass::Irrelevant})
    if (to_string(c) == text) return c;
  throw std::invalid_argument(fmt::format("unknown sentence class '{}'", text));
}

bool TaggedSentence::has_tag(EntityTag tag) const {
  return std::any_of(tokens.begin(), tokens.end(), [tag](const Token& t) { return t.tag == tag; });
}

std::vector<std::string> TaggedSentence::spans(EntityTag tag) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size();) {
    if (tokens[i].tag != tag) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < tokens.size() && tokens[j + 1].tag == tag) ++j;
    out.push_back(text.substr(tokens[i].begin, tokens[j].end - tokens[i].begin));
    i = j + 1;
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (word_char(c)) {
      while (j < text.size()) {
        if (word_char(text[j])) {
          ++j;
        } else if ((text[j] == '-' || text[j] == '\'' || text[j] == '.') && j + 1 < text.size() &&
                   word_char(text[j + 1])) {
          j += 2;
        } else {
          break;
        }
      }
    }
    out.push_back({std::string(text.substr(i, j - i)), i, j, EntityTag::Other});
    i = j;
  }
  return out;
}

std::vector<std::string> mentioned_components(const TaggedSentence& sentence, const Lexicon& lexicon) {
  std::set<std::size_t> hit;
  for (const auto& m : find_mentions(sentence, lexicon)) hit.insert(m.entry);
  std::vector<std::string> out;
  for (auto e : hit) out.push_back(lexicon[e].component);
  return out;
}

std::vector<TaggedSentence> RuleTagger::tag(const std::vector<std::string>& sentences) {
  std::vector<TaggedSentence> out;
  for (const auto& s : sentences) {
    TaggedSentence t{s, tokenize(s), {}};
    tag_containment(t.tokens);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::set<SentenceClass>> RuleClassifier::classify(const std::vector<TaggedSentence>& sentences,
                                                              const Lexicon& lexicon) {
  std::vector<std::set<SentenceClass>> out;
  for (const auto& s : sentences) {
    std::set<SentenceClass> classes;
    if (s.has_tag(EntityTag::Parent) && s.has_tag(EntityTag::Subsystem)) classes.insert(SentenceClass::Containment);
    auto mentions = find_mentions(s, lexicon);
    std::set<std::size_t> components;
    std::vector<bool> in_mention(s.tokens.size(), false);
    for (const auto& m : mentions) {
      components.insert(m.entry);
      for (std::size_t k = m.start, words = 0; k < s.tokens.size() && words < m.length; ++k) {
        in_mention[k] = true;
        if (is_word(s.tokens[k])) ++words;
      }
    }
    bool cue = false;
    for (std::size_t k = 0; k < s.tokens.size(); ++k)
      cue = cue || (!in_mention[k] && is_word(s.tokens[k]) && transfer_cue(lower(s.tokens[k].text)));
    if (components.size() >= 2 && cue) classes.insert(SentenceClass::ConnectionDesc);
    if (classes.empty() && components.empty() && !s.has_tag(EntityTag::Parent) &&
        !s.has_tag(EntityTag::Subsystem))
      classes.insert(SentenceClass::Irrelevant);
    out.push_back(std::move(classes));
  }
  return out;
}

std::vector<TaggedSentence> HttpTagger::tag(const std::vector<std::string>& sentences) {
  auto parts = batches(sentences, options_.batch_size);
  auto replies = post_batches(options_, "/tag", parts);
  std::vector<TaggedSentence> out;
  try {
    for (std::size_t b = 0; b < parts.size(); ++b) {
      const auto& tags = replies[b].at("tags");
      if (tags.size() != parts[b].size())
        throw BackendUnavailable(fmt::format("tagger replied with {} entries for {} sentences", tags.size(),
                                             parts[b].size()));
      for (std::size_t i = 0; i < parts[b].size(); ++i) {
        TaggedSentence t{parts[b][i], tokenize(parts[b][i]), {}};
        for (const auto& span : tags[i]) {
          auto begin = span.at("begin").get<std::size_t>();
          auto end = span.at("end").get<std::size_t>();
          auto tag = span.at("tag").get<int>();
          if (tag < 0 || tag > 2) throw BackendUnavailable(fmt::format("tag {} out of range", tag));
          for (auto& tok : t.tokens)
            if (tok.begin >= begin && tok.end <= end) tok.tag = static_cast<EntityTag>(tag);
        }
        out.push_back(std::move(t));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendUnavailable(fmt::format("malformed tagger reply: {}", e.what()));
  }
  return out;
}

std::vector<std::set<SentenceClass>> HttpClassifier::classify(const std::vector<TaggedSentence>& sentences,
                                                              const Lexicon&) {
  std::vector<std::string> texts;
  for (const auto& s : sentences) texts.push_back(s.text);
  auto parts = batches(texts, options_.batch_size);
  auto replies = post_batches(options_, "/classify", parts);
  std::vector<std::set<SentenceClass>> out;
  try {
    for (std::size_t b = 0; b < parts.size(); ++b) {
      const auto& classes = replies[b].at("classes");
      if (classes.size() != parts[b].size())
        throw BackendUnavailable(fmt::format("classifier replied with {} entries for {} sentences",
                                             classes.size(), parts[b].size()));
      for (const auto& entry : classes) {
        std::set<SentenceClass> set;
        for (const auto& name : entry) set.insert(sentence_class_from_string(name.get<std::string>()));
        out.push_back(std::move(set));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendUnavailable(fmt::format("malformed classifier reply: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw BackendUnavailable(e.what());
  }
  return out;
}

TaggedSentence tag_tokens(std::string_view sentence, TaggerBackend& backend) {
  auto out = backend.tag({std::string(sentence)});
  if (out.size() != 1) throw BackendUnavailable("tagger returned no result");
  return std::move(out.front());
}

}  // namespace xgen::doc
