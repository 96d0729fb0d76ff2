#include <gtest/gtest.h>

#include <atomic>
#include <deque>
#include <filesystem>
#include <mutex>
#include <random>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "support/fixtures.hpp"
#include "support/local_server.hpp"
#include "xgen/doc/pipeline.hpp"
#include "xgen/gen/backend.hpp"
#include "xgen/gen/dataset.hpp"
#include "xgen/gen/extract.hpp"
#include "xgen/gen/orchestrator.hpp"
#include "xgen/gen/prompt.hpp"
#include "xgen/model/linker.hpp"
#include "xgen/model/names.hpp"
#include "xgen/model/parser.hpp"
#include "xgen/model/printer.hpp"
#include "xgen/templ/template.hpp"

using namespace xgen;
using namespace xgen::gen;
using model::UnitKind;

namespace {

/// Replies from a fixed script, one per call, repeating the last one.
class ScriptedBackend : public GeneratorBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const PromptBundle& bundle, const GenerationLimits&) override {
    std::lock_guard lock(mutex_);
    prompts.push_back(bundle);
    auto i = std::min(prompts.size() - 1, replies_.size() - 1);
    return replies_[i];
  }
  std::string identity() const override { return "scripted"; }
  std::vector<PromptBundle> prompts;

 private:
  std::vector<std::string> replies_;
  std::mutex mutex_;
};

/// Routes by subject; unknown subjects fail.
class MapBackend : public GeneratorBackend {
 public:
  std::map<std::string, std::string> replies;
  std::string complete(const PromptBundle& bundle, const GenerationLimits&) override {
    std::lock_guard lock(mutex_);
    subjects.push_back(bundle.subject);
    auto it = replies.find(bundle.subject);
    if (it == replies.end()) throw BackendFailure("no reply for " + bundle.subject);
    return it->second;
  }
  std::string identity() const override { return "map"; }
  std::vector<std::string> subjects;

 private:
  std::mutex mutex_;
};

std::vector<model::ModelUnit> library_units() {
  std::vector<model::ModelUnit> out;
  for (auto file : {"control.x", "dynamics.x", "hydraulics.x", "signals.x"}) {
    auto units = model::parse_units(fixtures::read_file(fixtures::fixture_dir() / "corpus" / file), file);
    out.insert(out.end(), units.begin(), units.end());
  }
  return out;
}

const model::ModelUnit& unit_named(const std::vector<model::ModelUnit>& units, std::string_view name) {
  for (const auto& u : units)
    if (u.name == name) return u;
  throw std::out_of_range(std::string(name));
}

templ::TemplateInstance skeleton_of(const model::ModelUnit& reference) {
  std::vector<templ::PortSpec> ports;
  for (const auto& p : reference.ports) ports.push_back({*p.direction, p.port_type, p.name});
  model::PartDecl part{reference.name, model::to_instance_name(reference.name), {}};
  return templ::make_atomic_skeleton(part, ports, reference.kind);
}

doc::DocPipelineOptions aircraft_doc_options() {
  doc::DocPipelineOptions o;
  o.edits = doc::parse_edits(fixtures::read_file(fixtures::fixture_dir() / "aircraft" / "edits.json"));
  return o;
}

std::string aircraft_document() { return fixtures::read_file(fixtures::fixture_dir() / "aircraft" / "document.md"); }

GenerationContext context_for(const PromptLibrary& library, std::size_t budget = 3) {
  GenerationContext c;
  c.library = &library;
  c.functions = model::function_table(library.examples);
  c.repair_budget = budget;
  return c;
}

const char* kAutoPilotState = R"(state:
  initial state Idle
    when entry() then
      power_draw = 5;
    end;
  end;
)";

}  // namespace

// ---------------------------------------------------------------- prompts

TEST(StatePrompt, TableOrderAndInstruction) {
  auto lib = PromptLibrary::standard(library_units());
  auto skeleton = skeleton_of(unit_named(fixtures::aircraft_units(), "AutoPilot"));
  auto b = build_state_prompt("The aircraft electrical system comprises six components.",
                              "The rudder draws an idle current.", skeleton, {}, lib);
  std::vector<PromptLabel> labels;
  for (const auto& m : b.messages) labels.push_back(m.label);
  EXPECT_EQ(labels, (std::vector<PromptLabel>{PromptLabel::BNF, PromptLabel::StateSpec, PromptLabel::StateResponse,
                                              PromptLabel::Introduction, PromptLabel::CoupleText,
                                              PromptLabel::AtomicText, PromptLabel::GeneratedCode}));
  EXPECT_EQ(b.messages[3].content.rfind("Drawing on the textual descriptions", 0), 0u);
  EXPECT_EQ(b.messages[3].content, kStateInstruction);
  EXPECT_EQ(b.messages[2].role, Role::System);
  EXPECT_EQ(b.find(PromptLabel::Note), nullptr);
  EXPECT_EQ(b.messages[6].content.find("HOLE"), std::string::npos);
  EXPECT_EQ(b.messages[6].content, model::print_unit(skeleton.filled));
  EXPECT_EQ(b.purpose, "state");
  EXPECT_EQ(b.subject, "AutoPilot");
}

TEST(StatePrompt, NotesJoinedIntoOneMessage) {
  auto lib = PromptLibrary::standard(library_units());
  auto skeleton = skeleton_of(unit_named(fixtures::aircraft_units(), "AutoPilot"));
  auto b = build_state_prompt("c", "a", skeleton, {"first note", "second note"}, lib);
  ASSERT_EQ(b.messages.size(), 8u);
  EXPECT_EQ(b.messages[7].label, PromptLabel::Note);
  EXPECT_EQ(b.messages[7].content, "first note\nsecond note");
  EXPECT_EQ(std::count_if(b.messages.begin(), b.messages.end(),
                          [](const PromptMessage& m) { return m.label == PromptLabel::Note; }),
            1);
}

TEST(StatePrompt, ContinuousSkeletonAsksForEquations) {
  auto lib = PromptLibrary::standard(library_units());
  auto skeleton = skeleton_of(unit_named(fixtures::aircraft_units(), "Thrust"));
  auto b = build_state_prompt("c", "a", skeleton, {}, lib);
  EXPECT_EQ(b.purpose, "equation");
  EXPECT_EQ(b.messages[3].content, kEquationInstruction);
  EXPECT_NE(b.find(PromptLabel::StateSpec)->content.find("equation:"), std::string::npos);
  EXPECT_THROW(build_state_prompt("c", "a", templ::make_function_skeleton("f", 1), {}, lib), std::invalid_argument);
}

TEST(StatePrompt, FewShotExamplesMatchKind) {
  auto lib = PromptLibrary::standard(library_units());
  for (auto kind : {UnitKind::Discrete, UnitKind::Continuous}) {
    auto picked = lib.pick_examples(kind, "Thermostat");
    ASSERT_EQ(picked.size(), 2u);
    for (const auto* u : picked) {
      EXPECT_EQ(u->kind, kind);
      EXPECT_NE(u->name, "Thermostat");
    }
  }
}

TEST(PromptBundle, HashTracksContentOnly) {
  auto lib = PromptLibrary::standard(library_units());
  auto skeleton = skeleton_of(unit_named(fixtures::aircraft_units(), "Radar"));
  auto a = build_state_prompt("c", "a", skeleton, {}, lib);
  auto b = a;
  b.subject = "other";
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.messages.back().content += " ";
  EXPECT_NE(a.hash(), b.hash());
  auto j = to_json(a);
  EXPECT_EQ(j["hash"], a.hash());
  EXPECT_EQ(j["messages"].size(), a.messages.size());
}

TEST(AugmentationPrompt, IntroductionInputTask) {
  auto lib = PromptLibrary::standard();
  auto examples = library_units();
  std::vector<model::ModelUnit> two{unit_named(examples, "Pump"), unit_named(examples, "Reservoir")};
  auto b = build_augmentation_prompt("hydraulic pump", two, UnitKind::Continuous, lib);
  ASSERT_EQ(b.messages.size(), 3u);
  EXPECT_EQ(b.messages[0].label, PromptLabel::Introduction);
  EXPECT_EQ(b.messages[1].label, PromptLabel::Input);
  EXPECT_EQ(b.messages[2].label, PromptLabel::Task);
  EXPECT_EQ(b.messages[1].content, "hydraulic pump");
  EXPECT_NE(b.messages[2].content.find("Generate a couple/continuous/discrete simulation model"), std::string::npos);
  EXPECT_NE(b.messages[2].content.find(kAugmentationTask), std::string::npos);
  EXPECT_NE(b.messages[0].content.find("continuous Pump"), std::string::npos);
  EXPECT_EQ(b, build_augmentation_prompt("hydraulic pump", two, UnitKind::Continuous, lib));
  EXPECT_THROW(build_augmentation_prompt("hydraulic pump", {}, UnitKind::Continuous, lib), FewShotRequired);
}

TEST(FunctionPrompt, NamesCalleeAndArity) {
  auto lib = PromptLibrary::standard();
  auto control = unit_named(fixtures::aircraft_units(), "Control");
  auto b = build_function_prompt("clamp", 3, control, {}, lib);
  EXPECT_EQ(b.find(PromptLabel::Task)->content, "Function name: clamp\nParameter count: 3");
  EXPECT_EQ(b.find(PromptLabel::GeneratedCode)->content, model::print_unit(control));
}

// ---------------------------------------------------------------- backends

TEST(ReplayBackend, MemoryDirectoryAndMiss) {
  auto lib = PromptLibrary::standard();
  auto b = build_function_prompt("f", 1, unit_named(fixtures::aircraft_units(), "Control"), {}, lib);
  ReplayBackend mem;
  mem.add(b.hash(), "hello");
  EXPECT_EQ(mem.complete(b, {}), "hello");

  auto dir = std::filesystem::temp_directory_path() / "xgen_replay_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / (b.hash() + ".txt")) << "from file";
  }
  ReplayBackend files(dir);
  EXPECT_EQ(files.complete(b, {}), "from file");
  auto other = b;
  other.messages[0].content += "!";
  try {
    files.complete(other, {});
    FAIL();
  } catch (const BackendFailure& e) {
    EXPECT_NE(std::string(e.what()).find(other.hash()), std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST(RecordingBackend, RecordedSessionReplays) {
  auto dir = std::filesystem::temp_directory_path() / "xgen_record_test";
  std::filesystem::remove_all(dir);
  ReferenceBackend reference(fixtures::aircraft_units());
  RecordingBackend recorder(reference, dir);
  auto lib = PromptLibrary::standard(library_units());
  auto skeleton = skeleton_of(unit_named(fixtures::aircraft_units(), "Radar"));
  auto b = build_state_prompt("c", "a", skeleton, {}, lib);
  auto live = recorder.complete(b, {});
  EXPECT_TRUE(std::filesystem::exists(dir / (b.hash() + ".txt")));
  EXPECT_EQ(fixtures::read_file(dir / (b.hash() + ".prompt.txt")), b.render());
  ReplayBackend replay(dir);
  EXPECT_EQ(replay.complete(b, {}), live);
  EXPECT_EQ(recorder.identity(), "record(reference)");
  std::filesystem::remove_all(dir);
}

TEST(ReferenceBackend, AnswersEachPurpose) {
  ReferenceBackend reference(fixtures::aircraft_units());
  auto lib = PromptLibrary::standard();
  auto radar = unit_named(fixtures::aircraft_units(), "Radar");
  auto reply = reference.complete(build_state_prompt("c", "a", skeleton_of(radar), {}, lib), {});
  EXPECT_NE(reply.find("```"), std::string::npos);
  EXPECT_EQ(extract_code(reply), model::print_section(radar, "parameter") + model::print_section(radar, "value") +
                                     model::print_section(radar, "state"));
  auto fn = reference.complete(build_function_prompt("clamp", 3, radar, {}, lib), {});
  EXPECT_EQ(extract_code(fn), model::print_unit(unit_named(fixtures::aircraft_units(), "clamp")));
  EXPECT_THROW(reference.complete(build_function_prompt("nothing", 1, radar, {}, lib), {}), BackendFailure);
}

TEST(HttpChatBackend, SpeaksJsonProtocol) {
  fixtures::LocalServer server;
  nlohmann::json seen;
  std::string auth;
  server.server.Post("/v1/complete", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(nlohmann::json{{"content", "```\nconnect(a.p, b.q)\n```"}}.dump(), "application/json");
  });
  server.server.Post("/v1/broken", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"text":"no content field"})", "application/json");
  });
  server.server.Post("/v1/fail", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  server.start();

  auto lib = PromptLibrary::standard();
  auto b = build_connection_prompt("sys", {"a", "b"}, {"a feeds b."}, {}, lib);
  HttpChatBackend http({server.url() + "/v1", "/complete", "tiny", "secret", std::chrono::milliseconds(5000)});
  GenerationLimits limits{256, 0.0, 42};
  EXPECT_EQ(http.complete(b, limits), "```\nconnect(a.p, b.q)\n```");
  ASSERT_EQ(seen["messages"].size(), b.messages.size());
  EXPECT_EQ(seen["messages"][0]["role"], "user");
  EXPECT_EQ(seen["messages"][0]["content"], b.messages[0].content);
  EXPECT_EQ(seen["max_tokens"], 256);
  EXPECT_EQ(seen["temperature"], 0.0);
  EXPECT_EQ(seen["seed"], 42);
  EXPECT_EQ(seen["model"], "tiny");
  EXPECT_EQ(auth, "Bearer secret");

  HttpChatBackend broken({server.url() + "/v1", "/broken", "", "", std::chrono::milliseconds(5000)});
  EXPECT_THROW(broken.complete(b, limits), BackendFailure);
  HttpChatBackend failing({server.url() + "/v1", "/fail", "", "", std::chrono::milliseconds(5000)});
  EXPECT_THROW(failing.complete(b, limits), BackendFailure);
  HttpChatBackend dead({fixtures::dead_url(), "/complete", "", "", std::chrono::milliseconds(500)});
  EXPECT_THROW(dead.complete(b, limits), BackendFailure);
}

// ---------------------------------------------------------------- extraction

TEST(ExtractCode, ReplyCorpus) {
  struct Case {
    std::string reply;
    std::string expected;
  };
  const std::vector<Case> cases{
      {"Here it is:\n```x\nstate:\n  initial state A\n  end;\n```\nHope this helps.",
       "state:\n  initial state A\n  end;\n"},
      {"```\nvalue:\n  Real v = 0;\n```\nand\n```\nstate:\n  initial state A\n  end;\n```",
       "value:\n  Real v = 0;\nstate:\n  initial state A\n  end;\n"},
      {"Sure. The state section follows.\nstate:\n  initial state A\n  end;\nThis models the idle state.",
       "state:\n  initial state A\n  end;\n"},
      {"The function is\nfunction f(Real x)\n  return x;\nend;\nIt returns its argument.",
       "function f(Real x)\n  return x;\nend;\n"},
      {"Connections:\nconnect(a.p, b.q);\nconnect(b.r, a.s)\n\nDone.", "connect(a.p, b.q);\nconnect(b.r, a.s)\n"},
      {"value:\n  Real v = 0;\n\nequation:\n  der(v) = 1;\n", "value:\n  Real v = 0;\n\nequation:\n  der(v) = 1;\n"},
      {"  no code here  ", "no code here"},
  };
  for (const auto& c : cases) EXPECT_EQ(extract_code(c.reply), c.expected) << c.reply;
}

TEST(ParseConnectionLines, GrammarAndErrors) {
  auto parsed = parse_connection_lines("connect(a.p, b.q);\n\n  connect( c . r ,d.s )\n");
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_EQ(parsed[0].from.str(), "a.p");
  EXPECT_EQ(parsed[1].to.str(), "d.s");
  try {
    parse_connection_lines("connect(a.p, b.q)\nThe radar feeds control.");
    FAIL();
  } catch (const UnparseableOutput& e) {
    EXPECT_EQ(e.line(), "The radar feeds control.");
  }
  EXPECT_THROW(parse_connection_lines("connect(a, b.q)"), UnparseableOutput);
}

// ---------------------------------------------------------------- hole fill

TEST(FillHole, ReferenceStateAcceptedFirstAttempt) {
  auto lib = PromptLibrary::standard(library_units());
  auto reference = unit_named(fixtures::aircraft_units(), "AutoPilot");
  ReferenceBackend backend(fixtures::aircraft_units());
  auto result = fill_hole(skeleton_of(reference), templ::Hole::State, backend, "c", "a", context_for(lib));
  EXPECT_TRUE(result.report.accepted);
  EXPECT_EQ(result.report.attempts.size(), 1u);
  EXPECT_EQ(model::print_unit(result.unit), model::print_unit(reference));
}

TEST(FillHole, ProseAroundCodeIsExtracted) {
  auto lib = PromptLibrary::standard(library_units());
  auto skeleton = skeleton_of(unit_named(fixtures::aircraft_units(), "AutoPilot"));
  ScriptedBackend backend({std::string("The rudder idles at a fixed draw.\n") + kAutoPilotState +
                           "This keeps the draw constant."});
  auto result = fill_hole(skeleton, templ::Hole::State, backend, "c", "a", context_for(lib));
  EXPECT_EQ(result.report.attempts.size(), 1u);
  ASSERT_TRUE(result.unit.states);
  EXPECT_EQ(result.unit.states->initial_state, "Idle");
  EXPECT_TRUE(result.unit.values.empty());
}

TEST(FillHole, AlwaysInvalidExhaustsBudget) {
  auto lib = PromptLibrary::standard(library_units());
  auto skeleton = skeleton_of(unit_named(fixtures::aircraft_units(), "AutoPilot"));
  ScriptedBackend backend({"state:\n  initial state\n"});
  try {
    fill_hole(skeleton, templ::Hole::State, backend, "c", "a", context_for(lib, 2));
    FAIL();
  } catch (const Exhausted& e) {
    EXPECT_EQ(e.report().attempts.size(), 2u);
    EXPECT_FALSE(e.report().accepted);
  }
  EXPECT_EQ(backend.prompts.size(), 2u);
}

TEST(FillHole, NotesFollowDiagnosticClass) {
  auto lib = PromptLibrary::standard(library_units());
  auto skeleton = skeleton_of(unit_named(fixtures::aircraft_units(), "AutoPilot"));
  ScriptedBackend backend({
      "state:\n  initial state Idle\n    when entry( then\n",                       // syntax
      "value:\n  Real v = 0;\n",                                                     // missing section
      "state:\n  initial state Idle\n    when entry() then\n      ghost = 1;\n    end;\n  end;\n",  // unknown name
      kAutoPilotState,
  });
  auto result = fill_hole(skeleton, templ::Hole::State, backend, "c", "a", context_for(lib, 4));
  ASSERT_EQ(result.report.attempts.size(), 4u);
  std::vector<NoteClass> classes;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& a = result.report.attempts[i];
    ASSERT_FALSE(a.diagnostics.empty());
    classes.push_back(note_class_of(a.diagnostics.front()));
    EXPECT_EQ(a.note_added, repair_note(a.diagnostics.front()));
  }
  EXPECT_EQ(classes, (std::vector<NoteClass>{NoteClass::Syntax, NoteClass::MissingSection,
                                             NoteClass::UnknownIdentifier}));
  EXPECT_TRUE(result.report.attempts.back().note_added.empty());
  EXPECT_NE(result.report.attempts[2].note_added.find("ghost"), std::string::npos);
}

TEST(FillHole, RetriesExtendPromptByOneNote) {
  auto lib = PromptLibrary::standard(library_units());
  auto skeleton = skeleton_of(unit_named(fixtures::aircraft_units(), "AutoPilot"));
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t budget = 1 + rng() % 5;
    std::size_t good_at = rng() % 7;  // may lie beyond the budget
    std::vector<std::string> replies(good_at, "state:\n  initial state\n");
    replies.push_back(kAutoPilotState);
    ScriptedBackend backend(replies);
    try {
      auto result = fill_hole(skeleton, templ::Hole::State, backend, "c", "a", context_for(lib, budget));
      EXPECT_EQ(result.report.attempts.size(), good_at + 1);
    } catch (const Exhausted& e) {
      EXPECT_EQ(e.report().attempts.size(), budget);
      EXPECT_GT(good_at + 1, budget);
    }
    ASSERT_LE(backend.prompts.size(), budget);
    for (std::size_t i = 1; i < backend.prompts.size(); ++i) {
      const auto& prev = backend.prompts[i - 1].messages;
      const auto& next = backend.prompts[i].messages;
      ASSERT_EQ(next.back().label, PromptLabel::Note);
      std::vector<PromptMessage> prev_base(prev.begin(), prev.end() - (i > 1 ? 1 : 0));
      std::vector<PromptMessage> next_base(next.begin(), next.end() - 1);
      EXPECT_EQ(prev_base, next_base);
      auto prev_lines = i > 1 ? std::count(prev.back().content.begin(), prev.back().content.end(), '\n') + 1 : 0;
      auto next_lines = std::count(next.back().content.begin(), next.back().content.end(), '\n') + 1;
      EXPECT_EQ(next_lines, prev_lines + 1);
      if (i > 1) EXPECT_EQ(next.back().content.rfind(prev.back().content + "\n", 0), 0u);
    }
  }
}

TEST(FillHole, RejectsBadArguments) {
  auto lib = PromptLibrary::standard();
  auto skeleton = skeleton_of(unit_named(fixtures::aircraft_units(), "AutoPilot"));
  ScriptedBackend backend({kAutoPilotState});
  EXPECT_THROW(fill_hole(skeleton, templ::Hole::Equation, backend, "c", "a", context_for(lib)),
               std::invalid_argument);
  EXPECT_THROW(fill_hole(skeleton, templ::Hole::State, backend, "c", "a", context_for(lib, 0)),
               std::invalid_argument);
}

// ---------------------------------------------------------------- connections

namespace {

doc::ComponentNode aircraft_system() {
  doc::ComponentNode root{"aircraft electrical system", {}, {}, false, {}};
  for (const char* name : {"AutoPilot", "BallisticSceneControl", "Battery", "Control", "Radar", "Thrust"})
    root.children.push_back({name, {}, {}, false, {}});
  root.children[2].aliases = {"power supply"};
  return root;
}

}  // namespace

TEST(InferConnections, ReferenceReplyGivesFixtureCouplings) {
  auto lib = PromptLibrary::standard();
  ReferenceBackend backend(fixtures::aircraft_units());
  auto result = infer_connections({"The power supply feeds the radar."}, aircraft_system(), backend,
                                  context_for(lib));
  auto reference = unit_named(fixtures::aircraft_units(), "AircraftElectricalSystem");
  ASSERT_EQ(result.connections.size(), reference.connections.size());
  for (std::size_t i = 0; i < reference.connections.size(); ++i) {
    EXPECT_EQ(result.connections[i].from, reference.connections[i].from);
    EXPECT_EQ(result.connections[i].to, reference.connections[i].to);
  }
  EXPECT_TRUE(result.diagnostics.empty());
}

TEST(InferConnections, UnknownPartsDropped) {
  auto lib = PromptLibrary::standard();
  ScriptedBackend backend({"connect(Ghost.p, Radar.q)\nconnect(power_supply.voltage, Radar.voltage)\n"
                           "connect(Battery.voltage, radar.voltage)"});
  auto result = infer_connections({"s"}, aircraft_system(), backend, context_for(lib));
  ASSERT_EQ(result.connections.size(), 1u);
  EXPECT_EQ(result.connections[0].from.str(), "battery.voltage");
  EXPECT_EQ(result.connections[0].to.str(), "radar.voltage");
  ASSERT_EQ(result.diagnostics.size(), 1u);
  EXPECT_EQ(result.diagnostics[0].code, model::DiagCode::UnknownPart);
  EXPECT_EQ(result.diagnostics[0].severity, model::Severity::Warning);
  EXPECT_NE(result.diagnostics[0].message.find("Ghost"), std::string::npos);
}

TEST(InferConnections, EmptyCorpusSkipsBackend) {
  auto lib = PromptLibrary::standard();
  ScriptedBackend backend({"connect(a.b, c.d)"});
  auto result = infer_connections({}, aircraft_system(), backend, context_for(lib));
  EXPECT_TRUE(result.connections.empty());
  ASSERT_EQ(result.diagnostics.size(), 1u);
  EXPECT_EQ(result.diagnostics[0].severity, model::Severity::Warning);
  EXPECT_TRUE(backend.prompts.empty());
}

TEST(InferConnections, ProseRepliesExhaustBudget) {
  auto lib = PromptLibrary::standard();
  ScriptedBackend backend({"```\nconnect(Battery.voltage, Radar.voltage)\nand the radar feeds control\n```"});
  try {
    infer_connections({"s"}, aircraft_system(), backend, context_for(lib, 3));
    FAIL();
  } catch (const UnparseableOutput& e) {
    EXPECT_EQ(e.report().attempts.size(), 3u);
  }
  EXPECT_EQ(backend.prompts.size(), 3u);
  EXPECT_NE(backend.prompts[1].find(PromptLabel::Note), nullptr);
}

TEST(InferConnections, OutputAlwaysLinksAgainstComposition) {
  auto lib = PromptLibrary::standard();
  auto system = aircraft_system();
  std::set<std::string> instances;
  for (const auto& c : system.children) instances.insert(model::to_instance_name(c.name));
  const std::vector<std::string> names{"Battery", "battery", "auto_pilot", "AutoPilot", "Ghost", "radar_unit",
                                       "Thrust", "control", "Control_Bus", "power supply"};
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::string reply;
    for (int k = 0, n = 1 + rng() % 6; k < n; ++k) {
      auto a = names[rng() % names.size()], b = names[rng() % names.size()];
      std::replace(a.begin(), a.end(), ' ', '_');
      std::replace(b.begin(), b.end(), ' ', '_');
      reply += fmt::format("connect({}.p{}, {}.q{})\n", a, k, b, k);
    }
    ScriptedBackend backend({reply});
    auto result = infer_connections({"s"}, system, backend, context_for(lib));
    for (const auto& c : result.connections) {
      EXPECT_TRUE(instances.count(c.from.part)) << c.from.part;
      EXPECT_TRUE(instances.count(c.to.part)) << c.to.part;
    }
    auto couple = templ::build_couple(system, result.connections);
    EXPECT_EQ(couple.filled.connections.size(), result.connections.size());
  }
}

// ---------------------------------------------------------------- functions

TEST(MissingFunctions, ClampGeneratedFromLibrary) {
  auto lib = PromptLibrary::standard(library_units());
  ReferenceBackend reference(fixtures::aircraft_units());
  MapBackend backend;
  auto control = unit_named(fixtures::aircraft_units(), "Control");
  backend.replies["clamp"] = reference.complete(build_function_prompt("clamp", 3, control, {}, lib), {});
  auto result = generate_missing_functions(control, backend, context_for(lib));
  EXPECT_EQ(backend.subjects, std::vector<std::string>{"clamp"});
  ASSERT_EQ(result.functions.size(), 1u);
  EXPECT_EQ(model::print_unit(result.functions[0]),
            model::print_unit(unit_named(fixtures::aircraft_units(), "clamp")));
  EXPECT_TRUE(result.diagnostics.empty());
}

TEST(MissingFunctions, BuiltinsOnlyNeedNothing) {
  auto lib = PromptLibrary::standard(library_units());
  MapBackend backend;
  auto result = generate_missing_functions(unit_named(fixtures::aircraft_units(), "Radar"), backend,
                                           context_for(lib));
  EXPECT_TRUE(result.functions.empty());
  EXPECT_TRUE(backend.subjects.empty());
  // Library functions are not regenerated.
  auto thermal = unit_named(library_units(), "SpringMass");
  EXPECT_TRUE(generate_missing_functions(thermal, backend, context_for(lib)).functions.empty());
}

TEST(MissingFunctions, OnePromptPerSymbol) {
  auto lib = PromptLibrary::standard();
  auto unit = model::parse_unit(R"(continuous Mixer
value:
  Real x = 0;
port:
  input Real u;
  output Real y;
equation:
  der(x) = blend(u, x) - decay(x);
  y = blend(x, 1);
end;
)");
  MapBackend backend;
  backend.replies["blend"] = "```\nfunction blend(Real a, Real b)\n  return (a + b) / 2;\nend;\n```";
  backend.replies["decay"] = "  return 0.1 * a1 + helper(a1);\n";
  auto result = generate_missing_functions(unit, backend, context_for(lib));
  EXPECT_EQ(backend.subjects, (std::vector<std::string>{"blend", "decay"}));
  ASSERT_EQ(result.functions.size(), 2u);
  EXPECT_EQ(result.functions[0].name, "blend");
  EXPECT_EQ(result.functions[1].name, "decay");
  EXPECT_EQ(result.functions[1].body->params.size(), 1u);
  // `helper` is a second-level demand: reported, not generated.
  ASSERT_EQ(result.diagnostics.size(), 1u);
  EXPECT_EQ(result.diagnostics[0].code, model::DiagCode::UnknownFunction);
  EXPECT_NE(result.diagnostics[0].message.find("helper"), std::string::npos);
}

TEST(MissingFunctions, WrongArityRetried) {
  auto lib = PromptLibrary::standard();
  auto control = unit_named(fixtures::aircraft_units(), "Control");
  ScriptedBackend backend({"function clamp(Real x)\n  return x;\nend;",
                           fixtures::read_file(fixtures::fixture_dir() / "corpus" / "clamp.x")});
  auto result = generate_missing_functions(control, backend, context_for(lib));
  ASSERT_EQ(result.reports.size(), 1u);
  EXPECT_EQ(result.reports[0].attempts.size(), 2u);
  ASSERT_EQ(result.functions.size(), 1u);
  EXPECT_EQ(result.functions[0].body->params.size(), 3u);
}

// ---------------------------------------------------------------- pipeline

namespace {

PipelineRun aircraft_run(GeneratorBackend& backend, PipelineConfig config = {}) {
  auto lib = PromptLibrary::standard(library_units());
  return run_pipeline(aircraft_document(), aircraft_doc_options(), backend, lib, config);
}

}  // namespace

TEST(Pipeline, ReferenceBackendReproducesFixtureModelSet) {
  ReferenceBackend backend(fixtures::aircraft_units());
  auto run = aircraft_run(backend);
  for (const auto& d : run.diagnostics) ADD_FAILURE() << model::format_diagnostic(d);
  EXPECT_TRUE(run.complete);
  auto reference_dir = fixtures::fixture_dir() / "aircraft" / "reference";
  auto files = fixtures::x_files(reference_dir);
  ASSERT_EQ(run.units.size(), files.size());
  for (const auto& u : run.units)
    EXPECT_EQ(model::print_unit(u.unit), fixtures::read_file(reference_dir / (u.unit.name + ".x"))) << u.unit.name;
  EXPECT_EQ(run.units.front().unit.name, "AircraftElectricalSystem");
  EXPECT_EQ(run.units.back().unit.name, "clamp");
  EXPECT_TRUE(model::link_model_set(run.model_set()).ok());
}

TEST(Pipeline, DeterministicAcrossRunsAndConcurrency) {
  ReferenceBackend backend(fixtures::aircraft_units());
  PipelineConfig serial;
  serial.max_in_flight = 1;
  PipelineConfig wide;
  wide.max_in_flight = 6;
  auto a = aircraft_run(backend, serial);
  auto b = aircraft_run(backend, wide);
  auto c = aircraft_run(backend, wide);
  EXPECT_EQ(a.output_digest(), b.output_digest());
  EXPECT_EQ(b.output_digest(), c.output_digest());
  ASSERT_EQ(a.transcript.size(), b.transcript.size());
  for (std::size_t i = 0; i < a.transcript.size(); ++i) EXPECT_EQ(a.transcript[i].prompt_hash, b.transcript[i].prompt_hash);
  EXPECT_NE(a.config_hash, b.config_hash);
  EXPECT_EQ(b.config_hash, c.config_hash);
  EXPECT_EQ(manifest_of(b).dump(), manifest_of(c).dump());
}

TEST(Pipeline, WritesOutputsAndManifest) {
  ReferenceBackend backend(fixtures::aircraft_units());
  auto run = aircraft_run(backend);
  auto dir = std::filesystem::temp_directory_path() / "xgen_pipeline_out";
  std::filesystem::remove_all(dir);
  write_outputs(run, dir);
  for (const auto& u : run.units) EXPECT_TRUE(std::filesystem::exists(dir / (u.unit.name + ".x")));
  auto manifest = nlohmann::json::parse(fixtures::read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest["version"], std::string(kVersion));
  EXPECT_EQ(manifest["backend"], "reference");
  EXPECT_EQ(manifest["output_digest"], run.output_digest());
  EXPECT_EQ(manifest["input_digest"].get<std::string>().size(), 16u);
  EXPECT_TRUE(manifest["complete"].get<bool>());
  EXPECT_EQ(manifest["units"].size(), run.units.size());
  EXPECT_FALSE(manifest.contains("timestamp"));
  auto transcript = fixtures::read_file(dir / "transcript.jsonl");
  EXPECT_EQ(static_cast<std::size_t>(std::count(transcript.begin(), transcript.end(), '\n')), run.transcript.size());
  auto composition = doc::composition_from_json(nlohmann::json::parse(fixtures::read_file(dir / "composition.json")));
  EXPECT_EQ(composition, run.document.composition);
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, FailedFillLeavesClosedSkeleton) {
  ReferenceBackend reference(fixtures::aircraft_units());
  // Everything but Radar answered by the reference.
  class NoRadar : public GeneratorBackend {
   public:
    explicit NoRadar(GeneratorBackend& inner) : inner_(inner) {}
    std::string complete(const PromptBundle& b, const GenerationLimits& l) override {
      if (b.subject == "Radar") return "I am not sure what the radar does.";
      return inner_.complete(b, l);
    }
    std::string identity() const override { return "no-radar"; }

   private:
    GeneratorBackend& inner_;
  } backend(reference);
  PipelineConfig config;
  config.repair_budget = 2;
  auto run = aircraft_run(backend, config);
  EXPECT_FALSE(run.complete);
  const auto& radar = *std::find_if(run.units.begin(), run.units.end(),
                                    [](const GeneratedUnit& u) { return u.unit.name == "Radar"; });
  EXPECT_FALSE(radar.complete);
  EXPECT_FALSE(radar.unit.states.has_value());
  EXPECT_EQ(radar.unit.ports.size(), 2u);
  auto radar_exchanges = std::count_if(run.transcript.begin(), run.transcript.end(),
                                       [](const Exchange& e) { return e.subject == "Radar"; });
  EXPECT_EQ(radar_exchanges, 2);
}

TEST(Pipeline, PaperLiteralConventionReversesAtomicPorts) {
  ReferenceBackend backend(fixtures::aircraft_units());
  PipelineConfig config;
  config.port_convention = templ::PortConvention::PaperLiteral;
  config.repair_budget = 1;
  auto run = aircraft_run(backend, config);
  const auto& battery = *std::find_if(run.units.begin(), run.units.end(),
                                      [](const GeneratedUnit& u) { return u.unit.name == "Battery"; });
  ASSERT_NE(battery.skeleton.filled.find_port("voltage"), nullptr);
  EXPECT_EQ(battery.skeleton.filled.find_port("voltage")->direction, model::PortDirection::Input);
  EXPECT_EQ(battery.skeleton.filled.find_port("load")->direction, model::PortDirection::Output);
}

TEST(Pipeline, KindOverridesAndConfigValidation) {
  auto config = pipeline_config_from_json(nlohmann::json::parse(
      R"({"repair_budget": 2, "max_in_flight": 3, "port_convention": "paper-literal",
          "kinds": {"radar": "continuous"}, "port_types": {"*": "Real"}, "seed": 9, "temperature": 0})"));
  EXPECT_EQ(config.repair_budget, 2u);
  EXPECT_EQ(config.port_convention, templ::PortConvention::PaperLiteral);
  EXPECT_EQ(config.limits.seed, 9u);
  EXPECT_EQ(pipeline_config_from_json(nlohmann::json::parse(to_json(config).dump())).kinds, config.kinds);
  EXPECT_THROW(pipeline_config_from_json(nlohmann::json::parse(R"({"budget": 2})")), std::invalid_argument);
  EXPECT_THROW(pipeline_config_from_json(nlohmann::json::parse(R"({"repair_budget": 0})")), std::invalid_argument);
  EXPECT_THROW(pipeline_config_from_json(nlohmann::json::parse(R"({"kinds": {"radar": "couple"}})")),
               std::invalid_argument);

  ReferenceBackend backend(fixtures::aircraft_units());
  PipelineConfig overridden;
  overridden.kinds["Radar"] = "continuous";
  overridden.repair_budget = 1;
  auto run = aircraft_run(backend, overridden);
  const auto& radar = *std::find_if(run.units.begin(), run.units.end(),
                                    [](const GeneratedUnit& u) { return u.unit.name == "Radar"; });
  EXPECT_EQ(radar.skeleton.kind, UnitKind::Continuous);
}

TEST(Pipeline, ReplayFixturesReproduceModelSet) {
  auto replay_dir = fixtures::fixture_dir() / "aircraft" / "replay";
  ReplayBackend replay(replay_dir);
  auto first = aircraft_run(replay);
  auto second = aircraft_run(replay);
  EXPECT_TRUE(first.complete);
  EXPECT_EQ(model::print_units(first.model_set()), model::print_units(second.model_set()));
  auto reference_dir = fixtures::fixture_dir() / "aircraft" / "reference";
  for (const auto& u : first.units)
    EXPECT_EQ(model::print_unit(u.unit), fixtures::read_file(reference_dir / (u.unit.name + ".x")));
  // Every committed response is used, and only those.
  std::set<std::string> used;
  for (const auto& e : first.transcript) used.insert(e.prompt_hash);
  std::set<std::string> committed;
  for (const auto& entry : std::filesystem::directory_iterator(replay_dir)) {
    auto name = entry.path().filename().string();
    if (name.size() == 20 && name.substr(16) == ".txt") committed.insert(name.substr(0, 16));
  }
  EXPECT_EQ(used, committed);
}

// ---------------------------------------------------------------- mask dataset

namespace {

std::vector<model::ModelUnit> atomic_corpus() {
  std::vector<model::ModelUnit> out;
  for (const auto& u : fixtures::load_units(fixtures::fixture_dir() / "corpus"))
    if (u.kind == UnitKind::Discrete || u.kind == UnitKind::Continuous) out.push_back(u);
  return out;
}

}  // namespace

TEST(MaskDataset, SpliceSoundOverCorpus) {
  auto units = atomic_corpus();
  ASSERT_GE(units.size(), 15u);
  auto samples = build_mask_dataset(units, 3);
  ASSERT_EQ(samples.size(), units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    EXPECT_GE(samples[i].input.find(kMaskToken), 0u);
    EXPECT_NE(samples[i].input.find(kMaskToken), std::string::npos);
    EXPECT_EQ(model::strip_spans(unmask(samples[i].input, samples[i].output)), model::strip_spans(units[i]))
        << units[i].name;
  }
}

TEST(MaskDataset, DiscreteInstructionPool) {
  auto autopilot = unit_named(fixtures::aircraft_units(), "AutoPilot");
  const std::string standard =
      "This is a partially masked code for X language discrete class models. The parts represented by [MASK] may "
      "include value, state, and other keywords of discrete class models that have been concealed. Based on the "
      "available code, please speculate on the exact content in [MASK].";
  EXPECT_EQ(discrete_mask_instructions().front(), standard);
  std::set<std::string> drawn;
  for (std::uint64_t seed = 0; seed < 64; ++seed) drawn.insert(build_mask_dataset({autopilot}, seed)[0].instruction);
  EXPECT_TRUE(drawn.count(standard));
  EXPECT_EQ(drawn.size(), discrete_mask_instructions().size());
  auto sample = build_mask_dataset({autopilot}, 0)[0];
  EXPECT_EQ(sample.output, model::print_section(autopilot, "value") + model::print_section(autopilot, "state"));
  EXPECT_EQ(sample.input.find("state:"), std::string::npos);
  EXPECT_NE(sample.input.find("parameter:"), std::string::npos);
}

TEST(MaskDataset, SeededAndByteIdentical) {
  auto units = atomic_corpus();
  EXPECT_EQ(to_jsonl(build_mask_dataset(units, 17)), to_jsonl(build_mask_dataset(units, 17)));
  EXPECT_NE(to_jsonl(build_mask_dataset(units, 17)), to_jsonl(build_mask_dataset(units, 18)));
  auto jsonl = to_jsonl(build_mask_dataset(units, 17));
  auto first_line = jsonl.substr(0, jsonl.find('\n'));
  EXPECT_EQ(first_line.rfind("{\"instruction\":", 0), 0u);
  EXPECT_LT(first_line.find("\"input\":"), first_line.find("\"output\":"));
  EXPECT_EQ(from_jsonl(jsonl), build_mask_dataset(units, 17));
}

TEST(MaskDataset, ContinuousOutputCarriesEquations) {
  auto thrust = unit_named(fixtures::aircraft_units(), "Thrust");
  auto sample = build_mask_dataset({thrust}, 5)[0];
  EXPECT_NE(sample.output.find(model::print_section(thrust, "equation")), std::string::npos);
  EXPECT_EQ(std::count(continuous_mask_instructions().begin(), continuous_mask_instructions().end(),
                       sample.instruction),
            1);
  EXPECT_EQ(model::strip_spans(unmask(sample.input, sample.output)), model::strip_spans(thrust));
}

TEST(MaskDataset, RejectsOtherKindsAndBadSplices) {
  EXPECT_THROW(mask_unit(unit_named(fixtures::aircraft_units(), "clamp"), "x"), std::invalid_argument);
  auto sample = mask_unit(unit_named(fixtures::aircraft_units(), "Radar"), "x");
  std::string one_mask = sample.input;
  one_mask.erase(one_mask.find("[MASK]\n"), 7);
  EXPECT_THROW(unmask(one_mask, sample.output), SpliceError);
  EXPECT_THROW(unmask(sample.input, "state:\n  initial state\n"), model::ParseError);
}
