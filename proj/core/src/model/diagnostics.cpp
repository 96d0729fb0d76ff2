#include "xgen/model/diagnostics.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace xgen::model {

std::string_view to_string(DiagCode code) {
  switch (code) {
    case DiagCode::UnexpectedToken: return "ParseError";
    case DiagCode::MissingEnd: return "MissingEnd";
    case DiagCode::UnknownSection: return "UnknownSection";
    case DiagCode::SectionNotPermitted: return "SectionNotPermitted";
    case DiagCode::DuplicateSection: return "DuplicateSection";
    case DiagCode::UnknownType: return "UnknownType";
    case DiagCode::BadLiteral: return "BadLiteral";
    case DiagCode::DuplicateName: return "DuplicateName";
    case DiagCode::PartNotImported: return "PartNotImported";
    case DiagCode::UnknownState: return "UnknownState";
    case DiagCode::MissingInitialState: return "MissingInitialState";
    case DiagCode::UnbalancedExpression: return "UnbalancedExpression";
    case DiagCode::UnknownClass: return "UnknownClass";
    case DiagCode::UnknownPort: return "UnknownPort";
    case DiagCode::UnknownPart: return "UnknownPart";
    case DiagCode::RecursiveComposition: return "RecursiveComposition";
    case DiagCode::DirectionMismatch: return "DirectionMismatch";
    case DiagCode::TypeMismatch: return "TypeMismatch";
    case DiagCode::NoTopLevel: return "NoTopLevel";
    case DiagCode::UnknownIdentifier: return "UnknownIdentifier";
    case DiagCode::UnknownFunction: return "UnknownFunction";
    case DiagCode::MissingSection: return "MissingSection";
    case DiagCode::Info: return "Info";
  }
  return "?";
}

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::Note: return "note";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
  }
  return "?";
}

std::string format_diagnostic(const Diagnostic& diag) {
  std::string where = diag.span.file.empty() ? "<input>" : diag.span.file;
  return fmt::format("{}:{}:{}: {}: [{}] {}", where, diag.span.begin.line, diag.span.begin.column,
                     to_string(diag.severity), to_string(diag.code), diag.message);
}

std::string diagnostics_to_json(const std::vector<Diagnostic>& diags) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& d : diags) {
    nlohmann::ordered_json span = {
        {"file", d.span.file},
        {"line", d.span.begin.line},
        {"column", d.span.begin.column},
        {"end_line", d.span.end.line},
        {"end_column", d.span.end.column},
    };
    nlohmann::ordered_json j = {
        {"severity", to_string(d.severity)},
        {"code", to_string(d.code)},
        {"span", span},
        {"message", d.message},
    };
    if (!d.unit.empty()) j["unit"] = d.unit;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

ParseError::ParseError(Diagnostic diag)
    : std::runtime_error(format_diagnostic(diag)), diag_(std::move(diag)) {}

}  // namespace xgen::model
