#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xgen/gen/repair.hpp"
#include "xgen/model/ast.hpp"

namespace xgen::gen {

/// Model text inside a free-form reply. Fenced blocks win and are joined in
/// order. Otherwise lines are kept from the first class, section or
/// `connect(` line up to the first prose line, or through the `end;` that
/// closes a class header. Returns the reply trimmed when nothing matches.
std::string extract_code(std::string_view reply);

class UnparseableOutput : public std::runtime_error {
 public:
  UnparseableOutput(std::string message, std::string line, RepairReport report = {})
      : std::runtime_error(std::move(message)), line_(std::move(line)), report_(std::move(report)) {}
  const std::string& line() const { return line_; }
  /// Attempts made before giving up, when raised by a repair loop.
  const RepairReport& report() const { return report_; }

 private:
  std::string line_;
  RepairReport report_;
};

/// One `connect(A.p, B.q)` per non-blank line, trailing `;` optional.
/// Throws UnparseableOutput naming the first line outside that grammar.
std::vector<model::Connection> parse_connection_lines(std::string_view text);

}  // namespace xgen::gen
