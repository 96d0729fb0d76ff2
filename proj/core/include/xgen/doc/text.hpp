#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace xgen::doc {

struct Sentence {
  std::string text;
  std::size_t begin = 0;  // byte offsets into the split document
  std::size_t end = 0;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Abbreviations whose periods never end a sentence. Entries match
/// case-insensitively and ignore whitespace, so "A.B." guards "A. B.".
std::vector<std::string> default_abbreviations();

/// Splits on '.', '!' or '?' followed by whitespace or the end of input, and
/// on blank lines. Sentences are trimmed; the text between consecutive
/// sentences is whitespace only, so the document is recoverable from the
/// offsets.
std::vector<Sentence> split_sentences(std::string_view document,
                                      const std::vector<std::string>& abbreviations = default_abbreviations());

/// Plain text from markdown: drops code fences, table rules and inline markup,
/// and puts headings, list items and table rows in paragraphs of their own.
std::string strip_markdown(std::string_view markdown);

}  // namespace xgen::doc
