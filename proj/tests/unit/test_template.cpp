#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/fixtures.hpp"
#include "xgen/model/linker.hpp"
#include "xgen/model/names.hpp"
#include "xgen/model/parser.hpp"
#include "xgen/model/printer.hpp"
#include "xgen/templ/template.hpp"

using namespace xgen;
using namespace xgen::templ;
using model::PortDirection;
using model::UnitKind;

namespace {

model::Connection conn(std::string a, std::string p, std::string b, std::string q) {
  return {{std::move(a), std::move(p)}, {std::move(b), std::move(q)}, {}};
}

doc::ComponentNode aircraft_node() {
  doc::ComponentNode root{"aircraft electrical system", {}, {}, false};
  for (const char* name : {"AutoPilot", "BallisticSceneControl", "Battery", "Control", "Radar", "Thrust"})
    root.children.push_back({name, {}, {}, false});
  return root;
}

std::vector<model::Connection> aircraft_connections() {
  for (const auto& u : fixtures::aircraft_units())
    if (u.kind == UnitKind::Couple) return u.connections;
  return {};
}

}  // namespace

TEST(BuildCouple, AircraftCompositionMatchesReference) {
  auto couple = build_couple(aircraft_node(), aircraft_connections());
  EXPECT_TRUE(couple.holes.empty());
  EXPECT_EQ(couple.filled.imports.size(), 6u);
  EXPECT_EQ(couple.filled.parts.size(), 6u);
  auto reference = fixtures::read_file(fixtures::fixture_dir() / "aircraft/reference/AircraftElectricalSystem.x");
  EXPECT_EQ(couple.print(), reference);
}

TEST(BuildCouple, ResolvesEndpointsByNormalisedName) {
  doc::ComponentNode node{"bench", {{"flow meter", {}, {}, false}, {"Tank", {}, {}, false}}, {}, false};
  auto couple = build_couple(node, {conn("FlowMeter", "rate", "tank", "inflow")});
  ASSERT_EQ(couple.filled.connections.size(), 1u);
  EXPECT_EQ(couple.filled.connections[0].from.part, "flow_meter");
  EXPECT_EQ(couple.filled.parts[0].class_name, "FlowMeter");
}

TEST(BuildCouple, SingleChildNoConnections) {
  doc::ComponentNode node{"solo system", {{"pump", {}, {}, false}}, {}, false};
  auto couple = build_couple(node, {});
  auto text = couple.print();
  EXPECT_EQ(text, "couple SoloSystem\n  import Pump;\npart:\n  Pump pump;\nend;\n");
  EXPECT_NO_THROW(model::parse_unit(text));
}

TEST(BuildCouple, UnknownPart) {
  try {
    build_couple(aircraft_node(), {conn("Ghost", "p", "radar", "voltage")});
    FAIL();
  } catch (const TemplateError& e) {
    EXPECT_EQ(e.code(), model::DiagCode::UnknownPart);
  }
}

TEST(BuildCouple, LinksOnceSkeletonsExist) {
  auto couple = build_couple(aircraft_node(), aircraft_connections());
  StaticPortTypes types;
  std::vector<model::ModelUnit> units{couple.filled};
  for (const auto& part : couple.filled.parts) {
    auto ports = extract_subsystem_ports(couple.filled.connections, part.instance_name, types);
    units.push_back(close_holes(make_atomic_skeleton(part, ports, UnitKind::Discrete)));
  }
  auto result = model::link_model_set(units);
  EXPECT_TRUE(result.ok()) << (result.diagnostics.empty() ? "" : model::format_diagnostic(result.diagnostics[0]));
}

TEST(ExtractPorts, DataflowConvention) {
  StaticPortTypes types(std::map<std::string, std::string>{{"cmd_in", "Bool"}});
  auto ports = extract_subsystem_ports({conn("Control", "cmd", "AutoPilot", "cmd_in")}, "AutoPilot", types);
  ASSERT_EQ(ports.size(), 1u);
  EXPECT_EQ(ports[0], (PortSpec{PortDirection::Input, "Bool", "cmd_in"}));

  auto control = extract_subsystem_ports({conn("Control", "cmd", "AutoPilot", "cmd_in")}, "Control", types);
  ASSERT_EQ(control.size(), 1u);
  EXPECT_EQ(control[0].direction, PortDirection::Output);
}

TEST(ExtractPorts, UnusedPart) {
  StaticPortTypes types;
  EXPECT_TRUE(extract_subsystem_ports({conn("Control", "cmd", "AutoPilot", "cmd_in")}, "Radar", types).empty());
}

TEST(ExtractPorts, PaperLiteralConvention) {
  StaticPortTypes types;
  auto ports = extract_subsystem_ports({conn("Control", "cmd", "AutoPilot", "cmd_in")}, "Control", types,
                                       PortConvention::PaperLiteral);
  ASSERT_EQ(ports.size(), 1u);
  EXPECT_EQ(ports[0].direction, PortDirection::Input);
  EXPECT_EQ(ports[0].name, "cmd");
  auto skeleton = make_atomic_skeleton({"Control", "control", {}}, ports, UnitKind::Discrete);
  EXPECT_NE(skeleton.print().find("  input Real cmd;"), std::string::npos);
}

TEST(ExtractPorts, BothDirectionsFlagged) {
  StaticPortTypes types;
  std::vector<model::Diagnostic> diags;
  auto ports = extract_subsystem_ports({conn("a", "x", "b", "u"), conn("c", "y", "a", "x")}, "a", types,
                                       PortConvention::Dataflow, &diags);
  ASSERT_EQ(ports.size(), 2u);
  EXPECT_EQ(ports[0].direction, PortDirection::Input);
  EXPECT_EQ(ports[1].direction, PortDirection::Output);
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].severity, model::Severity::Warning);
}

TEST(ExtractPorts, IdempotentAndOrderInsensitive) {
  StaticPortTypes types;
  std::mt19937_64 rng(5);
  const std::vector<std::string> parts = {"a", "b", "c"};
  const std::vector<std::string> portnames = {"p", "q", "r", "s"};
  for (int round = 0; round < 200; ++round) {
    std::vector<model::Connection> list;
    int n = static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i)
      list.push_back(conn(parts[rng() % 3], portnames[rng() % 4], parts[rng() % 3], portnames[rng() % 4]));
    auto base = extract_subsystem_ports(list, "a", types);
    auto doubled = list;
    doubled.insert(doubled.end(), list.begin(), list.end());
    EXPECT_EQ(extract_subsystem_ports(doubled, "a", types), base);
    std::shuffle(list.begin(), list.end(), rng);
    EXPECT_EQ(extract_subsystem_ports(list, "a", types), base);
  }
}

TEST(StaticTypes, JsonTable) {
  auto types = StaticPortTypes::from_json(R"({"Radar.voltage": "Int", "flag": "Bool", "*": "Real"})");
  EXPECT_EQ(types.reason("radar", "voltage"), "Int");
  EXPECT_EQ(types.reason("x", "flag"), "Bool");
  EXPECT_EQ(types.reason("x", "y"), "Real");
  EXPECT_THROW(StaticPortTypes::from_json(R"({"a": "Complex"})"), std::invalid_argument);
}

TEST(Skeleton, DiscreteHasValueAndStateHoles) {
  std::vector<PortSpec> ports = {{PortDirection::Output, "Real", "power_draw"},
                                 {PortDirection::Input, "Real", "rudder_power"}};
  auto s = make_atomic_skeleton({"AutoPilot", "auto_pilot", {}}, ports, UnitKind::Discrete);
  EXPECT_EQ(s.holes, (std::set<Hole>{Hole::Value, Hole::State}));
  EXPECT_EQ(s.print(),
            "discrete AutoPilot\n/*HOLE:Value*/\nport:\n  output Real power_draw;\n  input Real rudder_power;\n"
            "/*HOLE:State*/\nend;\n");
}

TEST(Skeleton, ContinuousWithoutPorts) {
  auto s = make_atomic_skeleton({"Thrust", "thrust", {}}, {}, UnitKind::Continuous);
  EXPECT_EQ(s.holes, (std::set<Hole>{Hole::Value, Hole::Equation}));
  auto unit = model::parse_unit(s.print());
  EXPECT_EQ(unit.kind, UnitKind::Continuous);
  EXPECT_TRUE(unit.ports.empty());
}

TEST(Skeleton, FillingBothHolesClosesTemplate) {
  std::vector<PortSpec> ports = {{PortDirection::Output, "Real", "y"}};
  auto s = make_atomic_skeleton({"Src", "src", {}}, ports, UnitKind::Discrete);
  auto one = splice_hole(s, Hole::Value, "value:\n  Real level = 2;");
  EXPECT_EQ(one.holes, std::set<Hole>{Hole::State});
  auto two = splice_hole(one, Hole::State,
                         "state:\n  initial state On\n    when entry() then\n      statehold(1);\n"
                         "      y = level;\n    end;\n  end;");
  EXPECT_TRUE(two.holes.empty());
  auto text = two.print();
  EXPECT_EQ(text.find("HOLE"), std::string::npos);
  auto parsed = model::parse_unit(text);
  EXPECT_EQ(model::strip_spans(parsed), model::strip_spans(two.filled));
}

TEST(Skeleton, CoupledFillClosesBothHoles) {
  auto s = make_atomic_skeleton({"Ramp", "ramp", {}}, {{PortDirection::Output, "Real", "y"}}, UnitKind::Continuous);
  auto filled = splice_hole(s, Hole::Value, "value:\n  Real x = 0;\nequation:\n  der(x) = 1;\n  y = x;\n");
  EXPECT_TRUE(filled.holes.empty());
  EXPECT_EQ(filled.filled.equations.size(), 2u);
}

TEST(Skeleton, EveryPrintedTemplateParses) {
  std::mt19937_64 rng(9);
  const std::vector<std::string> types = {"Real", "Int", "Bool", "String"};
  for (int round = 0; round < 100; ++round) {
    std::vector<PortSpec> ports;
    int n = static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i)
      ports.push_back({rng() % 2 ? PortDirection::Input : PortDirection::Output, types[rng() % 4],
                       "p" + std::to_string(i)});
    auto kind = rng() % 2 ? UnitKind::Discrete : UnitKind::Continuous;
    auto s = make_atomic_skeleton({"U" + std::to_string(round), "u", {}}, ports, kind);
    EXPECT_NO_THROW(model::parse_unit(s.print()));
  }
  auto f = make_function_skeleton("clamp", 3);
  EXPECT_EQ(f.print(), "function clamp(Real a1, Real a2, Real a3)\n  /*HOLE:FunctionBody*/\nend;\n");
  auto done = splice_hole(f, Hole::FunctionBody, "  return min(max(a1, a2), a3);");
  EXPECT_TRUE(done.holes.empty());
  EXPECT_EQ(done.filled.body->statements.size(), 1u);
}

TEST(Skeleton, ReferenceAtomicsHaveSkeletonShape) {
  // Each reference atomic's ports equal what extraction derives from the
  // reference couple, so generated skeletons line up with them.
  auto units = fixtures::aircraft_units();
  auto connections = aircraft_connections();
  StaticPortTypes types;
  for (const auto& u : units) {
    if (u.kind != UnitKind::Discrete && u.kind != UnitKind::Continuous) continue;
    auto ports = extract_subsystem_ports(connections, model::to_instance_name(u.name), types);
    auto skeleton = make_atomic_skeleton({u.name, "", {}}, ports, u.kind);
    auto stripped = model::strip_spans(u);
    for (auto& p : stripped.ports) p.initial.reset();
    EXPECT_EQ(stripped.ports, skeleton.filled.ports) << u.name;
  }
}
