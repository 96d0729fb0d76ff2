#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgen/gen/prompt.hpp"
#include "xgen/model/diagnostics.hpp"

namespace xgen::gen {

/// Kind of fault a repair note answers.
enum class NoteClass { Syntax, UnknownIdentifier, MissingSection };

std::string_view to_string(NoteClass note);
NoteClass note_class_of(const model::Diagnostic& diag);
/// Note appended to the next prompt after a failed attempt.
std::string repair_note(const model::Diagnostic& diag);

struct RepairAttempt {
  PromptBundle prompt;
  std::string generated_text;
  std::vector<model::Diagnostic> diagnostics;
  std::string note_added;  // empty for the accepted attempt
};

struct RepairReport {
  std::vector<RepairAttempt> attempts;
  bool accepted = false;
};

nlohmann::ordered_json to_json(const RepairReport& report);

class Exhausted : public std::runtime_error {
 public:
  explicit Exhausted(RepairReport report);
  const RepairReport& report() const { return report_; }

 private:
  RepairReport report_;
};

}  // namespace xgen::gen
