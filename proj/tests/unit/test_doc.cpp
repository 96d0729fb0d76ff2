#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"
#include "support/local_server.hpp"
#include "xgen/doc/pipeline.hpp"
#include "xgen/model/names.hpp"

using namespace xgen;
using namespace xgen::doc;

namespace {

const char* kFixtureSentence =
    "The aircraft electrical system comprises six components: power supply, flight scenario control module, "
    "control bus, radar, rudder, and thrust module.";

std::vector<TaggedSentence> rule_tag(const std::vector<std::string>& texts) { return RuleTagger().tag(texts); }

std::vector<std::string> names_of(const std::vector<ComponentNode>& nodes) {
  std::vector<std::string> out;
  for (const auto& n : nodes) out.push_back(n.name);
  return out;
}

// parent/child pairs by normalized name, anywhere in the tree.
std::set<std::pair<std::string, std::string>> edges_of(const SystemComposition& c) {
  std::set<std::pair<std::string, std::string>> out;
  std::function<void(const ComponentNode&)> walk = [&](const ComponentNode& n) {
    for (const auto& child : n.children) {
      out.insert({model::normalize_name(n.name), model::normalize_name(child.name)});
      walk(child);
    }
  };
  walk(c.root);
  return out;
}

DocPipelineResult aircraft_pipeline(DocPipelineOptions options = {}) {
  auto dir = fixtures::fixture_dir() / "aircraft";
  options.edits = parse_edits(fixtures::read_file(dir / "edits.json"));
  return run_doc_pipeline(fixtures::read_file(dir / "document.md"), options);
}

}  // namespace

TEST(SplitSentences, AbbreviationGuard) {
  auto s = split_sentences("A. B. consists of X. It is fast.", {"A.B."});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].text, "A. B. consists of X.");
  EXPECT_EQ(s[1].text, "It is fast.");
  EXPECT_EQ(split_sentences("A. B. consists of X. It is fast.", {}).size(), 4u);
}

TEST(SplitSentences, TrivialCases) {
  EXPECT_TRUE(split_sentences("").empty());
  EXPECT_TRUE(split_sentences("  \n\n ").empty());
  auto one = split_sentences("a sentence without a terminator");
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].text, "a sentence without a terminator");
}

TEST(SplitSentences, DecimalsAbbreviationsAndParagraphs) {
  auto s = split_sentences("Voltage is 28.5 V, e.g. at rest. See Fig. 3 for details!\n\nHeading\n\nNext one?");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0].text, "Voltage is 28.5 V, e.g. at rest.");
  EXPECT_EQ(s[1].text, "See Fig. 3 for details!");
  EXPECT_EQ(s[2].text, "Heading");
  EXPECT_EQ(s[3].text, "Next one?");
}

TEST(SplitSentences, LosslessOnRandomDocuments) {
  std::mt19937_64 rng(11);
  const std::string alphabet = "ab. !?\n\t\"e.g)";
  for (int round = 0; round < 500; ++round) {
    std::string doc;
    auto len = rng() % 60;
    for (std::size_t i = 0; i < len; ++i) doc.push_back(alphabet[rng() % alphabet.size()]);
    auto sentences = split_sentences(doc);
    std::size_t at = 0;
    std::string rebuilt;
    for (const auto& s : sentences) {
      ASSERT_LE(at, s.begin);
      for (std::size_t k = at; k < s.begin; ++k) ASSERT_TRUE(std::isspace(static_cast<unsigned char>(doc[k])));
      EXPECT_EQ(doc.substr(s.begin, s.end - s.begin), s.text);
      rebuilt += doc.substr(at, s.end - at);
      at = s.end;
    }
    for (std::size_t k = at; k < doc.size(); ++k) ASSERT_TRUE(std::isspace(static_cast<unsigned char>(doc[k])));
    rebuilt += doc.substr(at);
    EXPECT_EQ(rebuilt, doc);
  }
}

TEST(StripMarkdown, BlocksBecomeSentences) {
  auto plain = strip_markdown(
      "# Title\nSome **bold** and `code` with [a link](http://x).\n\n- item one\n- item two\n\n```\nskip me.\n```\n"
      "| a | b |\n|---|---|\n| c | d |\n");
  std::vector<std::string> texts;
  for (const auto& s : split_sentences(plain)) texts.push_back(s.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"Title", "Some bold and code with a link.", "item one", "item two",
                                             "a b", "c d"}));
}

TEST(Tokenize, TokensCoverTextExceptWhitespace) {
  std::mt19937_64 rng(3);
  const std::string alphabet = "ab1-_.,: ()'\n";
  for (int round = 0; round < 300; ++round) {
    std::string text;
    auto len = rng() % 40;
    for (std::size_t i = 0; i < len; ++i) text.push_back(alphabet[rng() % alphabet.size()]);
    std::size_t at = 0;
    for (const auto& t : tokenize(text)) {
      for (std::size_t k = at; k < t.begin; ++k) ASSERT_TRUE(std::isspace(static_cast<unsigned char>(text[k])));
      ASSERT_EQ(text.substr(t.begin, t.end - t.begin), t.text);
      at = t.end;
    }
    for (std::size_t k = at; k < text.size(); ++k) ASSERT_TRUE(std::isspace(static_cast<unsigned char>(text[k])));
  }
  auto tokens = tokenize("28.5V bus, thrust-module's");
  std::vector<std::string> texts;
  for (const auto& t : tokens) texts.push_back(t.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"28.5V", "bus", ",", "thrust-module's"}));
}

TEST(RuleTagger, FixtureSentence) {
  RuleTagger tagger;
  auto t = tag_tokens(kFixtureSentence, tagger);
  EXPECT_EQ(t.spans(EntityTag::Parent), std::vector<std::string>{"aircraft electrical system"});
  EXPECT_EQ(t.spans(EntityTag::Subsystem),
            (std::vector<std::string>{"power supply", "flight scenario control module", "control bus", "radar",
                                      "rudder", "thrust module"}));
  for (const auto& tok : t.tokens) EXPECT_LE(static_cast<int>(tok.tag), 2);
}

TEST(RuleTagger, NoEntities) {
  RuleTagger tagger;
  auto t = tag_tokens("The sky is blue.", tagger);
  for (const auto& tok : t.tokens) EXPECT_EQ(tok.tag, EntityTag::Other);
}

TEST(RuleTagger, SimpleContainment) {
  RuleTagger tagger;
  auto t = tag_tokens("X contains Y.", tagger);
  ASSERT_EQ(t.tokens.size(), 4u);
  EXPECT_EQ(t.tokens[0].tag, EntityTag::Parent);
  EXPECT_EQ(t.tokens[1].tag, EntityTag::Other);
  EXPECT_EQ(t.tokens[2].tag, EntityTag::Subsystem);
  EXPECT_EQ(t.tokens[3].tag, EntityTag::Other);
}

TEST(RuleTagger, VerbForms) {
  RuleTagger tagger;
  for (const char* s : {"The rig consists of a pump.", "The rig is composed of a pump.", "Rigs comprise a pump.",
                        "The rig contains: a pump."}) {
    auto t = tag_tokens(s, tagger);
    EXPECT_EQ(t.spans(EntityTag::Subsystem), std::vector<std::string>{"pump"}) << s;
  }
}

TEST(RuleClassifier, Classes) {
  Lexicon lexicon = {{"radar", {"radar"}}, {"power supply", {"power supply"}}};
  auto tagged = rule_tag({kFixtureSentence, "The power supply feeds the radar.", "The radar scans the sky.",
                          "The sky is blue."});
  auto classes = RuleClassifier().classify(tagged, lexicon);
  EXPECT_EQ(classes[0], std::set<SentenceClass>{SentenceClass::Containment});
  EXPECT_EQ(classes[1], std::set<SentenceClass>{SentenceClass::ConnectionDesc});
  EXPECT_TRUE(classes[2].empty());
  EXPECT_EQ(classes[3], std::set<SentenceClass>{SentenceClass::Irrelevant});
}

TEST(Mentions, CamelCaseAndLongestMatch) {
  Lexicon lexicon = {{"Control", {"Control"}}, {"BallisticSceneControl", {"BallisticSceneControl", "control bus"}}};
  auto t = rule_tag({"The control bus relays what Control computes, as does BallisticSceneControl."})[0];
  EXPECT_EQ(mentioned_components(t, lexicon), (std::vector<std::string>{"Control", "BallisticSceneControl"}));
  auto bus_only = rule_tag({"The control bus is quiet."})[0];
  EXPECT_EQ(mentioned_components(bus_only, lexicon), std::vector<std::string>{"BallisticSceneControl"});
}

TEST(BuildComposition, FixtureDocument) {
  auto doc = fixtures::read_file(fixtures::fixture_dir() / "aircraft/document.md");
  auto result = run_doc_pipeline(doc);
  const auto& root = result.composition.root;
  EXPECT_FALSE(result.composition.synthetic_root);
  EXPECT_EQ(root.name, "aircraft electrical system");
  EXPECT_EQ(names_of(root.children),
            (std::vector<std::string>{"control bus", "flight scenario control module", "power supply", "radar",
                                      "rudder", "thrust module"}));
  for (const auto& c : root.children) EXPECT_FALSE(c.provenance.empty());
}

TEST(BuildComposition, CycleDetected) {
  try {
    build_composition(rule_tag({"A contains B.", "B contains A."}));
    FAIL();
  } catch (const CycleDetected& e) {
    EXPECT_EQ(e.path(), (std::vector<std::string>{"A", "B", "A"}));
  }
  EXPECT_THROW(build_composition(rule_tag({"A contains A."})), CycleDetected);
}

TEST(BuildComposition, NameNormalisation) {
  auto c = build_composition(rule_tag({"A contains B.", "a  contains C."}));
  EXPECT_EQ(c.root.name, "A");
  EXPECT_EQ(c.root.aliases, std::vector<std::string>{"a"});
  EXPECT_EQ(names_of(c.root.children), (std::vector<std::string>{"B", "C"}));
  EXPECT_EQ(c.root.provenance, (std::vector<std::size_t>{0, 1}));
}

TEST(BuildComposition, NoRelations) {
  EXPECT_THROW(build_composition(rule_tag({"The sky is blue."})), NoRelations);
  EXPECT_THROW(build_composition({}), NoRelations);
}

TEST(BuildComposition, SeveralRootsJoined) {
  std::vector<model::Diagnostic> diags;
  auto c = build_composition(rule_tag({"A contains B.", "C contains D."}), &diags);
  EXPECT_TRUE(c.synthetic_root);
  EXPECT_EQ(names_of(c.root.children), (std::vector<std::string>{"A", "C"}));
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].severity, model::Severity::Warning);
  for (const auto& e : lexicon_of(c)) EXPECT_NE(e.component, "system");
}

TEST(BuildComposition, PermutationInvariant) {
  auto doc = fixtures::read_file(fixtures::fixture_dir() / "docs/plant.md");
  auto sentences = split_sentences(strip_markdown(doc));
  std::vector<std::string> texts;
  for (const auto& s : sentences) texts.push_back(s.text);
  auto base = build_composition(rule_tag(texts));
  std::mt19937_64 rng(21);
  for (int round = 0; round < 30; ++round) {
    std::vector<std::size_t> order(texts.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::string> shuffled;
    for (auto i : order) shuffled.push_back(texts[i]);
    auto c = build_composition(rule_tag(shuffled));
    std::function<void(ComponentNode&)> remap = [&](ComponentNode& n) {
      for (auto& id : n.provenance) id = order[id];
      std::sort(n.provenance.begin(), n.provenance.end());
      for (auto& child : n.children) remap(child);
    };
    remap(c.root);
    EXPECT_EQ(c, base);
  }
}

TEST(BuildComposition, RecallOnFixtureCorpus) {
  auto dir = fixtures::fixture_dir() / "docs";
  auto result = run_doc_pipeline(fixtures::read_file(dir / "plant.md"));
  auto edges = edges_of(result.composition);
  auto expected = nlohmann::json::parse(fixtures::read_file(dir / "plant.relations.json"));
  for (const auto& pair : expected) {
    auto parent = model::normalize_name(pair[0].get<std::string>());
    auto child = model::normalize_name(pair[1].get<std::string>());
    EXPECT_TRUE(edges.count({parent, child})) << parent << " -> " << child;
  }
  auto aircraft = run_doc_pipeline(fixtures::read_file(fixtures::fixture_dir() / "aircraft/document.md"));
  EXPECT_EQ(edges_of(aircraft.composition).size(), 6u);
}

TEST(Edits, RenameAddRemove) {
  auto c = build_composition(rule_tag({"The rig contains a pump and a tank."}));
  apply_edits(c, parse_edits(R"([{"op":"rename","path":"pump","name":"FeedPump"},
                                   {"op":"add","path":"","name":"valve"},
                                   {"op":"add","path":"valve","name":"spring"},
                                   {"op":"remove","path":"tank"}])"));
  EXPECT_EQ(names_of(c.root.children), (std::vector<std::string>{"FeedPump", "valve"}));
  EXPECT_TRUE(c.root.children[0].manual);
  EXPECT_EQ(c.root.children[0].aliases, std::vector<std::string>{"pump"});
  EXPECT_EQ(c.root.children[0].provenance, std::vector<std::size_t>{0});
  ASSERT_NE(c.find("valve/spring"), nullptr);
  EXPECT_TRUE(c.find("valve/spring")->manual);
  EXPECT_THROW(apply_edits(c, parse_edits(R"([{"op":"remove","path":"ghost"}])")), EditError);
  EXPECT_THROW(apply_edits(c, parse_edits(R"([{"op":"add","path":"","name":"Feed pump"}])")), EditError);
  EXPECT_THROW(parse_edits(R"([{"op":"move","path":"x"}])"), EditError);
  EXPECT_THROW(parse_edits(R"({"op":"add"})"), EditError);
}

TEST(Edits, AircraftRenamesMatchReferenceParts) {
  auto result = aircraft_pipeline();
  EXPECT_EQ(model::to_class_name(result.composition.root.name), "AircraftElectricalSystem");
  EXPECT_EQ(names_of(result.composition.root.children),
            (std::vector<std::string>{"AutoPilot", "BallisticSceneControl", "Battery", "Control", "Radar", "Thrust"}));
}

TEST(Composition, JsonRoundTrip) {
  auto result = aircraft_pipeline();
  auto back = composition_from_json(nlohmann::json::parse(to_json(result.composition).dump()));
  EXPECT_EQ(back, result.composition);
}

TEST(SliceCorpus, Rules) {
  auto result = aircraft_pipeline();
  const auto& slice = result.slice;
  auto id_of = [&](std::string_view prefix) {
    for (std::size_t i = 0; i < result.sentences.size(); ++i)
      if (result.sentences[i].text.rfind(prefix, 0) == 0) return i;
    ADD_FAILURE() << prefix;
    return std::size_t{0};
  };
  auto contains = [](const std::vector<std::size_t>& ids, std::size_t id) {
    return std::find(ids.begin(), ids.end(), id) != ids.end();
  };
  auto wiring = id_of("Wiring colours");
  EXPECT_FALSE(contains(slice.model_corpus, wiring));
  for (const auto& [name, ids] : slice.component_corpora) EXPECT_FALSE(contains(ids, wiring)) << name;

  auto radar = id_of("The radar warms up");
  EXPECT_TRUE(contains(slice.component_corpora.at("Radar"), radar));

  auto link = id_of("The radar reports its target range");
  EXPECT_TRUE(contains(slice.connection_corpus, link));
  EXPECT_TRUE(contains(slice.component_corpora.at("Radar"), link));
  EXPECT_TRUE(contains(slice.component_corpora.at("Control"), link));

  for (const char* prefix : {"The power supply feeds", "The control bus sends", "The rudder returns",
                             "The thrust module passes"})
    EXPECT_TRUE(contains(slice.connection_corpus, id_of(prefix))) << prefix;
}

TEST(SliceCorpus, Soundness) {
  for (const char* file : {"aircraft/document.md", "docs/plant.md"}) {
    auto result = run_doc_pipeline(fixtures::read_file(fixtures::fixture_dir() / file));
    std::set<std::size_t> model(result.slice.model_corpus.begin(), result.slice.model_corpus.end());
    for (auto id : result.slice.model_corpus) EXPECT_LT(id, result.sentences.size());
    for (auto id : result.slice.connection_corpus) EXPECT_TRUE(model.count(id));
    for (const auto& [name, ids] : result.slice.component_corpora)
      for (auto id : ids) EXPECT_TRUE(model.count(id)) << name;
  }
}

TEST(HttpBackends, MatchRuleBackendsAndBoundConcurrency) {
  fixtures::LocalServer local;
  std::atomic<int> in_flight{0}, peak{0}, requests{0};
  auto track = [&] {
    int now = ++in_flight;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    ++requests;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  };
  local.server.Post("/tag", [&](const httplib::Request& req, httplib::Response& res) {
    track();
    nlohmann::json reply{{"tags", nlohmann::json::array()}};
    auto body = nlohmann::json::parse(req.body);
    for (const auto& s : body.at("sentences")) {
      nlohmann::json spans = nlohmann::json::array();
      auto tagged = RuleTagger().tag({s.get<std::string>()});
      for (const auto& tok : tagged[0].tokens)
        if (tok.tag != EntityTag::Other) {
          nlohmann::json span;
          span["begin"] = tok.begin;
          span["end"] = tok.end;
          span["tag"] = static_cast<int>(tok.tag);
          spans.push_back(span);
        }
      reply["tags"].push_back(spans);
    }
    --in_flight;
    res.set_content(reply.dump(), "application/json");
  });
  local.server.Post("/classify", [&](const httplib::Request& req, httplib::Response& res) {
    track();
    nlohmann::json reply{{"classes", nlohmann::json::array()}};
    auto body = nlohmann::json::parse(req.body);
    for (const auto& s : body.at("sentences"))
      reply["classes"].push_back(s.get<std::string>().find("feeds") != std::string::npos
                                     ? nlohmann::json{"ConnectionDesc"}
                                     : nlohmann::json::array());
    --in_flight;
    res.set_content(reply.dump(), "application/json");
  });
  local.start();

  HttpBackendOptions options{local.url(), 2, 3, std::chrono::milliseconds(5000)};
  HttpTagger tagger(options);
  HttpClassifier classifier(options);
  DocPipelineOptions with_remote;
  with_remote.tagger = &tagger;
  with_remote.classifier = &classifier;
  auto remote = aircraft_pipeline(with_remote);
  auto local_rules = aircraft_pipeline();
  EXPECT_TRUE(remote.fallbacks.empty());
  EXPECT_EQ(remote.tagger, "http:" + local.url());
  EXPECT_EQ(remote.composition, local_rules.composition);
  for (std::size_t i = 0; i < remote.tagged.size(); ++i)
    EXPECT_EQ(remote.tagged[i].tokens, local_rules.tagged[i].tokens);
  EXPECT_LE(peak.load(), 3);
  EXPECT_GE(peak.load(), 2);
  EXPECT_EQ(requests.load(), 2 * static_cast<int>((remote.sentences.size() + 1) / 2));
}

TEST(HttpBackends, UnavailableFallsBackToRules) {
  HttpBackendOptions options{fixtures::dead_url(), 4, 2, std::chrono::milliseconds(500)};
  HttpTagger tagger(options);
  HttpClassifier classifier(options);
  EXPECT_THROW(tagger.tag({"X contains Y."}), BackendUnavailable);
  DocPipelineOptions with_remote;
  with_remote.tagger = &tagger;
  with_remote.classifier = &classifier;
  auto result = aircraft_pipeline(with_remote);
  EXPECT_EQ(result.fallbacks.size(), 2u);
  EXPECT_EQ(result.tagger, "rule");
  EXPECT_EQ(result.classifier, "rule");
  EXPECT_EQ(result.composition, aircraft_pipeline().composition);
}

TEST(HttpBackends, MalformedReplyIsUnavailable) {
  fixtures::LocalServer local;
  local.server.Post("/tag", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"tags": [[{"begin": 0, "end": 1, "tag": 7}]]})", "application/json");
  });
  local.start();
  HttpTagger tagger({local.url(), 4, 1, std::chrono::milliseconds(2000)});
  EXPECT_THROW(tagger.tag({"X contains Y."}), BackendUnavailable);
  EXPECT_THROW(tagger.tag({"a.", "b."}), BackendUnavailable);
}
