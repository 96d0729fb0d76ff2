#pragma once

#include <string>

namespace xgen::model {

struct SourcePos {
  int line = 1;
  int column = 1;

  friend bool operator==(const SourcePos&, const SourcePos&) = default;
  friend auto operator<=>(const SourcePos&, const SourcePos&) = default;
};

struct SourceSpan {
  std::string file;
  SourcePos begin;
  SourcePos end;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

}  // namespace xgen::model
