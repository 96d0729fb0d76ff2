#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "xgen/model/source_span.hpp"

namespace xgen::model {

enum class TokenKind {
  Identifier,
  Number,
  String,
  Punct,  // ( ) , ; . : and operators
  Invalid,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  SourcePos begin;
  SourcePos end;

  bool is(std::string_view t) const {
    return (kind == TokenKind::Punct || kind == TokenKind::Identifier) && text == t;
  }
};

/// Splits X text into tokens. `//` line comments and `/* */` block comments
/// are dropped. The final token is always TokenKind::End.
std::vector<Token> tokenize(std::string_view source);

/// Joins expression tokens into the canonical stored form: binary operators
/// spaced, no space inside parentheses or before commas.
std::string render_tokens(const std::vector<Token>& tokens);

/// Re-tokenizes and re-renders, so differently spaced text compares equal.
std::string canonical_expression(std::string_view text);

}  // namespace xgen::model
