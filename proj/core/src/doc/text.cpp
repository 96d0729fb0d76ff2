#include "xgen/doc/text.hpp"

#include <cctype>
#include <sstream>

namespace xgen::doc {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

// Offsets of periods covered by an abbreviation occurrence.
std::vector<bool> guarded_periods(std::string_view doc, const std::vector<std::string>& abbreviations) {
  std::vector<bool> guarded(doc.size(), false);
  std::string compact;
  std::vector<std::size_t> origin;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (is_space(doc[i])) continue;
    compact.push_back(lower(doc[i]));
    origin.push_back(i);
  }
  for (const auto& abbr : abbreviations) {
    std::string key;
    for (char c : abbr)
      if (!is_space(c)) key.push_back(lower(c));
    if (key.empty()) continue;
    for (auto at = compact.find(key); at != std::string::npos; at = compact.find(key, at + 1)) {
      auto first = origin[at];
      if (first > 0 && is_alnum(doc[first - 1])) continue;
      auto last = origin[at + key.size() - 1];
      if (is_alnum(key.back()) && last + 1 < doc.size() && is_alnum(doc[last + 1])) continue;
      for (std::size_t k = at; k < at + key.size(); ++k)
        if (compact[k] == '.') guarded[origin[k]] = true;
    }
  }
  return guarded;
}

std::string strip_inline(std::string_view line) {
  std::string out;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '!' && i + 1 < line.size() && line[i + 1] == '[') continue;
    if (c == '[') {
      auto close = line.find(']', i);
      if (close != std::string_view::npos && close + 1 < line.size() && line[close + 1] == '(') {
        auto paren = line.find(')', close);
        if (paren != std::string_view::npos) {
          out += strip_inline(line.substr(i + 1, close - i - 1));
          i = paren;
          continue;
        }
      }
    }
    if (c == '`' || c == '*') continue;
    if (c == '_' && i + 1 < line.size() && line[i + 1] == '_') {
      ++i;
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_table_rule(std::string_view line) {
  if (line.find('-') == std::string_view::npos) return false;
  for (char c : line)
    if (c != '|' && c != '-' && c != ':' && !is_space(c)) return false;
  return true;
}

}  // namespace

std::vector<std::string> default_abbreviations() {
  return {"e.g.", "i.e.", "etc.", "vs.", "Fig.", "Figs.", "No.", "approx.", "Mr.", "Mrs.", "Dr.", "cf."};
}

std::vector<Sentence> split_sentences(std::string_view doc, const std::vector<std::string>& abbreviations) {
  std::vector<Sentence> out;
  const auto guarded = guarded_periods(doc, abbreviations);
  std::size_t start = 0;
  auto emit = [&](std::size_t from, std::size_t to) {
    while (from < to && is_space(doc[from])) ++from;
    while (to > from && is_space(doc[to - 1])) --to;
    if (to > from) out.push_back({std::string(doc.substr(from, to - from)), from, to});
  };
  for (std::size_t i = 0; i < doc.size(); ++i) {
    char c = doc[i];
    if (c == '\n') {
      std::size_t j = i + 1;
      while (j < doc.size() && doc[j] != '\n' && is_space(doc[j])) ++j;
      if (j < doc.size() && doc[j] == '\n') {
        emit(start, i);
        start = j;
        i = j;
      }
      continue;
    }
    if (c != '.' && c != '!' && c != '?') continue;
    if (c == '.' && guarded[i]) continue;
    std::size_t end = i + 1;
    while (end < doc.size() && is_closer(doc[end])) ++end;
    if (end < doc.size() && !is_space(doc[end])) continue;
    emit(start, end);
    start = end;
    i = end - 1;
  }
  emit(start, doc.size());
  return out;
}

std::string strip_markdown(std::string_view markdown) {
  std::istringstream in{std::string(markdown)};
  std::string out;
  std::string line;
  bool fenced = false;
  auto paragraph = [&](std::string_view text) {
    if (!out.empty() && out.back() != '\n') out += '\n';
    if (!out.empty() && (out.size() < 2 || out[out.size() - 2] != '\n')) out += '\n';
    out += text;
    out += "\n\n";
  };
  while (std::getline(in, line)) {
    auto body = trim(line);
    if (body.substr(0, 3) == "```" || body.substr(0, 3) == "~~~") {
      fenced = !fenced;
      continue;
    }
    if (fenced) continue;
    if (body.empty()) {
      if (!out.empty() && out.back() != '\n') out += '\n';
      out += '\n';
      continue;
    }
    if (body.front() == '#') {
      while (!body.empty() && body.front() == '#') body.remove_prefix(1);
      paragraph(strip_inline(trim(body)));
      continue;
    }
    if (body.front() == '|') {
      if (is_table_rule(body)) continue;
      std::string row;
      std::size_t pos = 0;
      while (pos < body.size()) {
        auto bar = body.find('|', pos);
        auto cell = trim(body.substr(pos, bar == std::string_view::npos ? std::string_view::npos : bar - pos));
        if (!cell.empty()) row += (row.empty() ? "" : " ") + strip_inline(cell);
        if (bar == std::string_view::npos) break;
        pos = bar + 1;
      }
      paragraph(row);
      continue;
    }
    while (!body.empty() && body.front() == '>') body = trim(body.substr(1));
    bool item = false;
    if (body.size() > 1 && (body[0] == '-' || body[0] == '*' || body[0] == '+') && body[1] == ' ') {
      body = trim(body.substr(2));
      item = true;
    } else {
      std::size_t d = 0;
      while (d < body.size() && std::isdigit(static_cast<unsigned char>(body[d]))) ++d;
      if (d > 0 && d + 1 < body.size() && (body[d] == '.' || body[d] == ')') && body[d + 1] == ' ') {
        body = trim(body.substr(d + 2));
        item = true;
      }
    }
    if (item) {
      paragraph(strip_inline(body));
      continue;
    }
    out += strip_inline(body);
    out += '\n';
  }
  return out;
}

}  // namespace xgen::doc
