#include "xgen/gen/extract.hpp"

#include <array>
#include <regex>

#include <fmt/format.h>

namespace xgen::gen {

namespace {

constexpr std::array kClassWords{"couple", "discrete", "continuous", "function"};
constexpr std::array kSectionWords{"parameter", "value", "port", "part", "connection", "state", "equation"};

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < text.size()) out.push_back(text.substr(pos));
      break;
    }
    out.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

bool starts_with_word(std::string_view line, std::string_view word) {
  if (line.substr(0, word.size()) != word) return false;
  if (line.size() == word.size()) return true;
  char c = line[word.size()];
  return c == ' ' || c == '\t';
}

bool is_class_header(std::string_view t) {
  for (auto w : kClassWords)
    if (starts_with_word(t, w)) return true;
  return false;
}

bool is_section_header(std::string_view t) {
  for (auto w : kSectionWords) {
    std::string_view sw(w);
    if (t.substr(0, sw.size()) == sw && trim(t.substr(sw.size())) == ":") return true;
  }
  return false;
}

bool is_fence(std::string_view t) { return t.substr(0, 3) == "```"; }

std::string join(const std::vector<std::string_view>& lines) {
  std::string out;
  for (auto l : lines) {
    out.append(l);
    out += '\n';
  }
  return out;
}

}  // namespace

std::string extract_code(std::string_view reply) {
  auto lines = lines_of(reply);

  std::vector<std::string_view> fenced;
  bool inside = false, any_fence = false;
  for (auto l : lines) {
    if (is_fence(trim(l))) {
      inside = !inside;
      any_fence = true;
      continue;
    }
    if (inside) fenced.push_back(l);
  }
  if (any_fence && !fenced.empty()) return join(fenced);

  std::size_t start = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto t = trim(lines[i]);
    if (is_class_header(t) || is_section_header(t) || t.substr(0, 8) == "connect(") {
      start = i;
      break;
    }
  }
  if (start == lines.size()) return std::string(trim(reply));

  std::vector<std::string_view> kept;
  bool in_class = false;
  for (std::size_t i = start; i < lines.size(); ++i) {
    auto l = lines[i];
    auto t = trim(l);
    bool indented = !l.empty() && (l[0] == ' ' || l[0] == '\t');
    if (t.empty() || indented) {
      kept.push_back(l);
      continue;
    }
    if (is_class_header(t)) {
      in_class = true;
      kept.push_back(l);
      continue;
    }
    if (t == "end;") {
      kept.push_back(l);
      if (in_class) break;
      continue;
    }
    if (is_section_header(t) || t.substr(0, 8) == "connect(") {
      kept.push_back(l);
      continue;
    }
    break;
  }
  while (!kept.empty() && trim(kept.back()).empty()) kept.pop_back();
  return join(kept);
}

std::vector<model::Connection> parse_connection_lines(std::string_view text) {
  static const std::regex line_re(
      R"(^connect\s*\(\s*([A-Za-z_]\w*)\s*\.\s*([A-Za-z_]\w*)\s*,\s*([A-Za-z_]\w*)\s*\.\s*([A-Za-z_]\w*)\s*\)\s*;?$)");
  std::vector<model::Connection> out;
  for (auto l : lines_of(text)) {
    auto t = std::string(trim(l));
    if (t.empty()) continue;
    std::smatch m;
    if (!std::regex_match(t, m, line_re))
      throw UnparseableOutput(fmt::format("expected `connect(A.p, B.q)`, got '{}'", t), t);
    model::Connection c;
    c.from = {m[1].str(), m[2].str()};
    c.to = {m[3].str(), m[4].str()};
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace xgen::gen
