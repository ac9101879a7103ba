#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wscan/ast.hpp"

namespace wscan::js::detail {

enum class TokenType { Eof, Name, Number, String, Template, Regex, Punct };

struct TemplateChunk {
  std::string cooked;
  std::string raw;
  Span span;
};

struct TemplateExpr {
  uint32_t begin = 0;
  uint32_t end = 0;
  int line = 1;
  int col = 1;
};

struct Token {
  TokenType type = TokenType::Eof;
  std::string text;   // raw source text
  std::string value;  // cooked string value
  double number = 0;
  Span span;
  bool newline_before = false;
  std::vector<TemplateChunk> chunks;  // n + 1 chunks for n expressions
  std::vector<TemplateExpr> exprs;

  bool is(std::string_view punct) const { return type == TokenType::Punct && text == punct; }
  bool is_name(std::string_view name) const { return type == TokenType::Name && text == name; }
};

class Lexer {
 public:
  Lexer(std::string_view source, uint32_t begin, uint32_t end, int line, int col,
        std::vector<Comment>* comments);

  Token next();

 private:
  char peek(size_t ahead = 0) const {
    return pos_ + ahead < end_ ? source_[pos_ + ahead] : '\0';
  }
  bool at_end() const { return pos_ >= end_; }
  void advance();
  bool skip_trivia();  // returns true if a line terminator was crossed
  bool regex_allowed() const;

  Token lex_name();
  Token lex_number();
  Token lex_string(char quote);
  Token lex_template();
  Token lex_regex();
  Token lex_punct();
  uint32_t skip_template_expression();  // from just after "${" to the matching "}"

  [[noreturn]] void fail(const std::string& message) const;
  void start_token(Token& tok) const;
  void finish_token(Token& tok) const;
  uint32_t read_escape(std::string& out);

  std::string_view source_;
  uint32_t pos_;
  uint32_t end_;
  int line_;
  int col_;
  std::vector<Comment>* comments_;
  TokenType last_type_ = TokenType::Eof;
  std::string last_text_;
  bool has_last_ = false;
};

void append_utf8(std::string& out, uint32_t cp);

}  // namespace wscan::js::detail
