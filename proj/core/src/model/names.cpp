#include "xgen/model/names.hpp"

#include <cctype>
#include <vector>

namespace xgen::model {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }

// Splits on non-alphanumerics and on lower->Upper camel boundaries.
std::vector<std::string> words(std::string_view phrase) {
  std::vector<std::string> out;
  std::string curw;
  for (std::size_t i = 0; i < phrase.size(); ++i) {
    char c = phrase[i];
    if (!is_alnum(c)) {
      if (!curw.empty()) out.push_back(std::move(curw));
      curw.clear();
      continue;
    }
    if (!curw.empty() && is_upper(c) && is_lower(curw.back())) {
      out.push_back(std::move(curw));
      curw.clear();
    }
    curw.push_back(c);
  }
  if (!curw.empty()) out.push_back(std::move(curw));
  return out;
}

}  // namespace

std::string normalize_name(std::string_view name) {
  std::string out;
  for (char c : name)
    if (is_alnum(c)) out.push_back(lower(c));
  return out;
}

std::string to_class_name(std::string_view phrase) {
  std::string out;
  for (auto& w : words(phrase)) {
    out.push_back(upper(w.front()));
    out.append(w.begin() + 1, w.end());
  }
  if (!out.empty() && std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(0, "C");
  return out;
}

std::string to_instance_name(std::string_view phrase) {
  std::string out;
  for (auto& w : words(phrase)) {
    if (!out.empty()) out.push_back('_');
    for (char c : w) out.push_back(lower(c));
  }
  if (!out.empty() && std::isdigit(static_cast<unsigned char>(out.front()))) out.insert(0, "p_");
  return out;
}

std::string normalize_phrase(std::string_view phrase) {
  std::string out;
  bool pending_space = false;
  for (char c : phrase) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(lower(c));
  }
  return out;
}

}  // namespace xgen::model
