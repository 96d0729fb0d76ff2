#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xgen/model/source_span.hpp"

namespace xgen::model {

enum class Severity { Note, Warning, Error };

enum class DiagCode {
  // parser
  UnexpectedToken,
  MissingEnd,
  UnknownSection,
  SectionNotPermitted,
  DuplicateSection,
  UnknownType,
  BadLiteral,
  DuplicateName,
  PartNotImported,
  UnknownState,
  MissingInitialState,
  UnbalancedExpression,
  // linker
  UnknownClass,
  UnknownPort,
  UnknownPart,
  RecursiveComposition,
  DirectionMismatch,
  TypeMismatch,
  NoTopLevel,
  UnknownIdentifier,
  UnknownFunction,
  // generation
  MissingSection,
  // general
  Info,
};

std::string_view to_string(DiagCode code);
std::string_view to_string(Severity severity);

struct Diagnostic {
  Severity severity = Severity::Error;
  DiagCode code = DiagCode::Info;
  SourceSpan span;
  std::string message;
  /// Section keyword the diagnostic was raised in ("state", "port", ...), or
  /// empty when raised outside any section.
  std::string section;
  /// Unit the diagnostic belongs to, when known.
  std::string unit;
};

std::string format_diagnostic(const Diagnostic& diag);
std::string diagnostics_to_json(const std::vector<Diagnostic>& diags);

bool has_errors(const std::vector<Diagnostic>& diags);

/// Thrown by the strict parser entry points.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(Diagnostic diag);

  const Diagnostic& diagnostic() const noexcept { return diag_; }
  const SourceSpan& span() const noexcept { return diag_.span; }

 private:
  Diagnostic diag_;
};

}  // namespace xgen::model
