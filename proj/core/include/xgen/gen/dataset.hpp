#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xgen/model/ast.hpp"

namespace xgen::gen {

inline constexpr std::string_view kMaskToken = "[MASK]";

struct MaskSample {
  std::string instruction;
  std::string input;   // unit text with the hidden sections replaced by [MASK] lines
  std::string output;  // the hidden sections, value first

  friend bool operator==(const MaskSample&, const MaskSample&) = default;
};

/// Instruction pools; the discrete pool opens with the standard instruction.
const std::vector<std::string>& discrete_mask_instructions();
const std::vector<std::string>& continuous_mask_instructions();

/// Masked copy of a discrete or continuous unit: value and state (or value
/// and equation) sections hidden. Throws std::invalid_argument for other
/// kinds.
MaskSample mask_unit(const model::ModelUnit& unit, std::string_view instruction);

/// One sample per unit. Each instruction is drawn from the pool for the
/// unit's kind (`pool` replaces both when non-empty) with a generator seeded
/// by `seed`.
std::vector<MaskSample> build_mask_dataset(const std::vector<model::ModelUnit>& units, std::uint64_t seed,
                                           const std::vector<std::string>& pool = {});

class SpliceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Puts the hidden sections back at the [MASK] lines and parses the result.
model::ModelUnit unmask(std::string_view input, std::string_view output);

/// {"instruction":..,"input":..,"output":..} per line.
std::string to_jsonl(const std::vector<MaskSample>& samples);
std::vector<MaskSample> from_jsonl(std::string_view text);

}  // namespace xgen::gen
