#include "xgen/gen/dataset.hpp"

#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "xgen/model/parser.hpp"
#include "xgen/model/printer.hpp"

namespace xgen::gen {

using model::UnitKind;

const std::vector<std::string>& discrete_mask_instructions() {
  static const std::vector<std::string> pool{
      "This is a partially masked code for X language discrete class models. The parts represented by [MASK] "
      "may include value, state, and other keywords of discrete class models that have been concealed. Based on "
      "the available code, please speculate on the exact content in [MASK].",
      "Complete the discrete class model below by writing the value and state sections that stand at the "
      "[MASK] lines.",
      "Two sections of this X language discrete model were replaced with [MASK]. Reconstruct them from the "
      "header and ports.",
      "Restore the hidden value declarations and state machine of the following discrete model.",
  };
  return pool;
}

const std::vector<std::string>& continuous_mask_instructions() {
  static const std::vector<std::string> pool{
      "Complete the continuous class model below by writing the value and equation sections that stand at the "
      "[MASK] lines.",
      "Two sections of this X language continuous model were replaced with [MASK]. Reconstruct them from the "
      "header, parameters and ports.",
      "Restore the hidden value declarations and equations of the following continuous model.",
  };
  return pool;
}

namespace {

std::string_view behaviour_section(UnitKind kind) { return kind == UnitKind::Discrete ? "state" : "equation"; }

}  // namespace

MaskSample mask_unit(const model::ModelUnit& unit, std::string_view instruction) {
  if (unit.kind != UnitKind::Discrete && unit.kind != UnitKind::Continuous)
    throw std::invalid_argument(
        fmt::format("'{}' is a {} class; only discrete and continuous units are masked", unit.name,
                    model::to_string(unit.kind)));
  const auto behaviour = std::string(behaviour_section(unit.kind));
  MaskSample sample;
  sample.instruction = std::string(instruction);
  sample.output = model::print_section(unit, "value") + model::print_section(unit, behaviour);

  auto hidden = unit;
  hidden.values.clear();
  hidden.states.reset();
  hidden.equations.clear();
  sample.input = model::print_unit_with_markers(
      hidden, {{"value", std::string(kMaskToken)}, {behaviour, std::string(kMaskToken)}});
  return sample;
}

std::vector<MaskSample> build_mask_dataset(const std::vector<model::ModelUnit>& units, std::uint64_t seed,
                                           const std::vector<std::string>& pool) {
  std::mt19937_64 rng(seed);
  std::vector<MaskSample> out;
  out.reserve(units.size());
  for (const auto& unit : units) {
    const auto& choices = !pool.empty()                        ? pool
                          : unit.kind == UnitKind::Continuous ? continuous_mask_instructions()
                                                               : discrete_mask_instructions();
    const auto& instruction = choices[rng() % choices.size()];
    out.push_back(mask_unit(unit, instruction));
  }
  return out;
}

model::ModelUnit unmask(std::string_view input, std::string_view output) {
  // The hidden text is the value section followed by the behaviour section.
  std::size_t split = output.size();
  for (auto header : {"state:", "equation:"}) {
    std::string_view h(header);
    if (output.substr(0, h.size()) == h) split = 0;
    auto at = output.find(fmt::format("\n{}", h));
    if (at != std::string_view::npos && at + 1 < split) split = at + 1;
  }
  std::string parts[2] = {std::string(output.substr(0, split)), std::string(output.substr(split))};

  std::string text;
  std::size_t used = 0, pos = 0;
  while (pos < input.size()) {
    auto nl = input.find('\n', pos);
    auto end = nl == std::string_view::npos ? input.size() : nl;
    auto line = input.substr(pos, end - pos);
    if (line == kMaskToken) {
      if (used == 2) throw SpliceError("more than two [MASK] lines");
      text += parts[used++];
    } else {
      text.append(line);
      text += '\n';
    }
    pos = end + 1;
  }
  if (used != 2) throw SpliceError(fmt::format("expected two [MASK] lines, found {}", used));
  return model::parse_unit(text, "unmasked.x");
}

std::string to_jsonl(const std::vector<MaskSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    nlohmann::ordered_json j;
    j["instruction"] = s.instruction;
    j["input"] = s.input;
    j["output"] = s.output;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<MaskSample> from_jsonl(std::string_view text) {
  std::vector<MaskSample> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    auto j = nlohmann::json::parse(line);
    out.push_back({j.at("instruction").get<std::string>(), j.at("input").get<std::string>(),
                   j.at("output").get<std::string>()});
  }
  return out;
}

}  // namespace xgen::gen
