#include "xgen/model/lexer.hpp"

#include <array>
#include <cctype>

namespace xgen::model {

namespace {

constexpr std::array<std::string_view, 6> kTwoCharOps = {"<=", ">=", "==", "!=", "&&", "||"};
constexpr std::string_view kSingleCharPunct = "(),;.:=+-*/<>!^[]";

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token tok;
      tok.begin = pos_;
      if (at_end()) {
        tok.kind = TokenKind::End;
        tok.end = pos_;
        out.push_back(std::move(tok));
        return out;
      }
      char c = peek();
      if (is_ident_start(c)) {
        while (!at_end() && is_ident_char(peek())) tok.text.push_back(advance());
        tok.kind = TokenKind::Identifier;
      } else if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
        lex_number(tok);
      } else if (c == '"') {
        lex_string(tok);
      } else {
        lex_punct(tok);
      }
      tok.end = pos_;
      out.push_back(std::move(tok));
    }
  }

 private:
  bool at_end() const { return i_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
  }
  char advance() {
    char c = src_[i_++];
    if (c == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    return c;
  }

  void skip_trivia() {
    while (!at_end()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        advance();
        advance();
        while (!at_end() && !(peek() == '*' && peek(1) == '/')) advance();
        if (!at_end()) {
          advance();
          advance();
        }
      } else {
        return;
      }
    }
  }

  void lex_number(Token& tok) {
    tok.kind = TokenKind::Number;
    while (is_digit(peek())) tok.text.push_back(advance());
    if (peek() == '.' && is_digit(peek(1))) {
      tok.text.push_back(advance());
      while (is_digit(peek())) tok.text.push_back(advance());
    } else if (peek() == '.' && !is_ident_start(peek(1))) {
      // "1." is accepted as a real literal
      tok.text.push_back(advance());
    }
    if ((peek() == 'e' || peek() == 'E') &&
        (is_digit(peek(1)) || ((peek(1) == '-' || peek(1) == '+') && is_digit(peek(2))))) {
      tok.text.push_back(advance());
      if (peek() == '-' || peek() == '+') tok.text.push_back(advance());
      while (is_digit(peek())) tok.text.push_back(advance());
    }
  }

  void lex_string(Token& tok) {
    tok.kind = TokenKind::String;
    tok.text.push_back(advance());
    while (!at_end() && peek() != '"' && peek() != '\n') {
      if (peek() == '\\' && peek(1) != '\0') tok.text.push_back(advance());
      tok.text.push_back(advance());
    }
    if (peek() == '"') {
      tok.text.push_back(advance());
    } else {
      tok.kind = TokenKind::Invalid;
    }
  }

  void lex_punct(Token& tok) {
    for (auto op : kTwoCharOps) {
      if (peek() == op[0] && peek(1) == op[1]) {
        tok.text.push_back(advance());
        tok.text.push_back(advance());
        tok.kind = TokenKind::Punct;
        return;
      }
    }
    char c = advance();
    tok.text.push_back(c);
    tok.kind = kSingleCharPunct.find(c) != std::string_view::npos ? TokenKind::Punct
                                                                   : TokenKind::Invalid;
  }

  std::string_view src_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

bool is_operator(const Token& t) {
  if (t.kind == TokenKind::Punct) {
    return t.text != "(" && t.text != ")" && t.text != "," && t.text != "." &&
           t.text != "[" && t.text != "]";
  }
  return t.kind == TokenKind::Identifier &&
         (t.text == "and" || t.text == "or" || t.text == "not");
}

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

std::string render_tokens(const std::vector<Token>& tokens) {
  std::string out;
  const Token* prev = nullptr;
  bool prev_unary = false;
  for (const auto& tok : tokens) {
    if (tok.kind == TokenKind::End) break;
    bool unary = false;
    if (tok.kind == TokenKind::Punct && (tok.text == "-" || tok.text == "+" || tok.text == "!")) {
      unary = prev == nullptr || is_operator(*prev) || prev->is("(") || prev->is(",");
    }
    if (prev != nullptr) {
      bool tight = tok.is(")") || tok.is(",") || tok.is(".") || tok.is("]") ||
                   prev->is("(") || prev->is(".") || prev->is("[") || prev_unary ||
                   ((tok.is("(") || tok.is("[")) && prev->kind == TokenKind::Identifier &&
                    !is_operator(*prev));
      if (!tight) out.push_back(' ');
    }
    out += tok.text;
    prev = &tok;
    prev_unary = unary;
  }
  return out;
}

std::string canonical_expression(std::string_view text) { return render_tokens(tokenize(text)); }

}  // namespace xgen::model
