#include "lexer.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "wscan/error.hpp"

namespace wscan::js::detail {

namespace {

bool is_name_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80 || c == '\\';
}

bool is_name_part(unsigned char c) { return is_name_start(c) || std::isdigit(c); }

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Longest match first.
constexpr std::array<std::string_view, 52> kPunctuators = {
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "?\?=",
    "=>",   "==",  "!=",  "<=",  ">=",  "&&",  "||",  "??",  "?.",  "++",  "--",
    "+=",   "-=",  "*=",  "/=",  "%=",  "&=",  "|=",  "^=",  "<<",  ">>",  "**",
    "{",    "}",   "(",   ")",   "[",   "]",   ";",   ",",   "<",   ">",   "+",
    "-",    "*",   "/",   "%",   "&",   "|",   "^",   "!"};
constexpr std::string_view kSinglePunct = "~?:=.@#";

// Keywords after which an expression (and therefore a regex) may start.
bool keyword_precedes_expression(std::string_view word) {
  static constexpr std::array<std::string_view, 15> kWords = {
      "return", "typeof", "instanceof", "in",   "of",    "new",  "delete", "void",
      "throw",  "case",   "do",         "else", "yield", "await", "extends"};
  for (auto w : kWords) {
    if (w == word) return true;
  }
  return false;
}

}  // namespace

void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(char(cp));
  } else if (cp < 0x800) {
    out.push_back(char(0xc0 | (cp >> 6)));
    out.push_back(char(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(char(0xe0 | (cp >> 12)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(char(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(char(0xf0 | (cp >> 18)));
    out.push_back(char(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(char(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(char(0x80 | (cp & 0x3f)));
  }
}

Lexer::Lexer(std::string_view source, uint32_t begin, uint32_t end, int line, int col,
             std::vector<Comment>* comments)
    : source_(source), pos_(begin), end_(end), line_(line), col_(col), comments_(comments) {}

void Lexer::advance() {
  char c = source_[pos_++];
  if (c == '\n' || (c == '\r' && peek() != '\n')) {
    ++line_;
    col_ = 1;
  } else {
    ++col_;
  }
}

void Lexer::fail(const std::string& message) const {
  throw ParseFailure(ErrorCode::kParseError, message, line_, col_);
}

void Lexer::start_token(Token& tok) const {
  tok.span.begin = pos_;
  tok.span.start_line = line_;
  tok.span.start_col = col_;
}

void Lexer::finish_token(Token& tok) const {
  tok.span.end = pos_;
  tok.span.end_line = line_;
  tok.span.end_col = col_;
  if (tok.text.empty() && tok.type != TokenType::Eof) {
    tok.text = std::string(source_.substr(tok.span.begin, pos_ - tok.span.begin));
  }
}

bool Lexer::skip_trivia() {
  bool newline = false;
  while (!at_end()) {
    unsigned char c = peek();
    if (c == '\n' || c == '\r') {
      newline = true;
      advance();
    } else if (c == ' ' || c == '\t' || c == '\v' || c == '\f') {
      advance();
    } else if (c == 0xc2 && uint8_t(peek(1)) == 0xa0) {  // NBSP
      advance();
      advance();
    } else if (c == 0xe2 && uint8_t(peek(1)) == 0x80 &&
               (uint8_t(peek(2)) == 0xa8 || uint8_t(peek(2)) == 0xa9)) {  // LS / PS
      newline = true;
      advance();
      advance();
      advance();
    } else if (c == 0xef && uint8_t(peek(1)) == 0xbb && uint8_t(peek(2)) == 0xbf) {  // BOM
      advance();
      advance();
      advance();
    } else if (c == '/' && peek(1) == '/') {
      Comment comment;
      comment.span.begin = pos_;
      comment.span.start_line = line_;
      comment.span.start_col = col_;
      while (!at_end() && peek() != '\n' && peek() != '\r') advance();
      comment.span.end = pos_;
      comment.span.end_line = line_;
      comment.span.end_col = col_;
      comment.text = std::string(source_.substr(comment.span.begin, pos_ - comment.span.begin));
      if (comments_) comments_->push_back(std::move(comment));
    } else if (c == '/' && peek(1) == '*') {
      Comment comment;
      comment.span.begin = pos_;
      comment.span.start_line = line_;
      comment.span.start_col = col_;
      advance();
      advance();
      while (!(peek() == '*' && peek(1) == '/')) {
        if (at_end()) fail("Unterminated comment");
        if (peek() == '\n' || peek() == '\r') newline = true;
        advance();
      }
      advance();
      advance();
      comment.span.end = pos_;
      comment.span.end_line = line_;
      comment.span.end_col = col_;
      comment.text = std::string(source_.substr(comment.span.begin, pos_ - comment.span.begin));
      if (comments_) comments_->push_back(std::move(comment));
    } else {
      break;
    }
  }
  return newline;
}

bool Lexer::regex_allowed() const {
  if (!has_last_) return true;
  switch (last_type_) {
    case TokenType::Number:
    case TokenType::String:
    case TokenType::Template:
    case TokenType::Regex:
      return false;
    case TokenType::Name:
      return keyword_precedes_expression(last_text_);
    case TokenType::Punct:
      return !(last_text_ == ")" || last_text_ == "]" || last_text_ == "++" || last_text_ == "--");
    case TokenType::Eof:
      return true;
  }
  return true;
}

Token Lexer::next() {
  bool newline = skip_trivia();
  Token tok;
  if (at_end()) {
    start_token(tok);
    tok.type = TokenType::Eof;
    tok.newline_before = true;
    finish_token(tok);
    return tok;
  }
  unsigned char c = peek();
  if (is_name_start(c)) {
    tok = lex_name();
  } else if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
    tok = lex_number();
  } else if (c == '"' || c == '\'') {
    tok = lex_string(char(c));
  } else if (c == '`') {
    tok = lex_template();
  } else if (c == '/' && regex_allowed()) {
    tok = lex_regex();
  } else {
    tok = lex_punct();
  }
  tok.newline_before = newline;
  has_last_ = true;
  last_type_ = tok.type;
  last_text_ = tok.text;
  return tok;
}

Token Lexer::lex_name() {
  Token tok;
  tok.type = TokenType::Name;
  start_token(tok);
  std::string name;
  while (!at_end() && is_name_part(static_cast<unsigned char>(peek()))) {
    if (peek() == '\\') {
      advance();
      if (peek() != 'u') fail("Invalid identifier escape");
      read_escape(name);
      continue;
    }
    name.push_back(peek());
    advance();
  }
  finish_token(tok);
  tok.text = name;
  return tok;
}

Token Lexer::lex_number() {
  Token tok;
  tok.type = TokenType::Number;
  start_token(tok);
  std::string digits;
  auto take_digits = [&](auto pred) {
    while (!at_end() && (pred(peek()) || peek() == '_')) {
      if (peek() != '_') digits.push_back(peek());
      advance();
    }
  };
  if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'o' || peek(1) == 'O' ||
                        peek(1) == 'b' || peek(1) == 'B')) {
    char base_char = char(std::tolower(static_cast<unsigned char>(peek(1))));
    int base = base_char == 'x' ? 16 : base_char == 'o' ? 8 : 2;
    advance();
    advance();
    take_digits([](char ch) { return std::isxdigit(static_cast<unsigned char>(ch)) != 0; });
    if (digits.empty()) fail("Invalid number literal");
    double v = 0;
    for (char d : digits) {
      int dv = hex_value(d);
      if (dv < 0 || dv >= base) fail("Invalid digit in number literal");
      v = v * base + dv;
    }
    tok.number = v;
  } else {
    auto is_digit = [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) != 0; };
    take_digits(is_digit);
    if (peek() == '.') {
      digits.push_back('.');
      advance();
      take_digits(is_digit);
    }
    if (peek() == 'e' || peek() == 'E') {
      digits.push_back('e');
      advance();
      if (peek() == '+' || peek() == '-') {
        digits.push_back(peek());
        advance();
      }
      size_t before = digits.size();
      take_digits(is_digit);
      if (digits.size() == before) fail("Invalid exponent in number literal");
    }
    tok.number = std::strtod(digits.c_str(), nullptr);
  }
  if (peek() == 'n') advance();  // BigInt suffix; value kept as a double
  if (!at_end() && is_name_start(static_cast<unsigned char>(peek()))) {
    fail("Identifier directly after number");
  }
  finish_token(tok);
  return tok;
}

uint32_t Lexer::read_escape(std::string& out) {
  // Positioned just after the backslash.
  char c = peek();
  advance();
  switch (c) {
    case 'n': out.push_back('\n'); break;
    case 't': out.push_back('\t'); break;
    case 'r': out.push_back('\r'); break;
    case 'b': out.push_back('\b'); break;
    case 'f': out.push_back('\f'); break;
    case 'v': out.push_back('\v'); break;
    case '0': case '1': case '2': case '3': case '4': case '5': case '6': case '7': {
      // Legacy octal escape (sloppy mode): up to three digits, value at most 0377.
      uint32_t value = uint32_t(c - '0');
      int max_digits = c <= '3' ? 2 : 1;
      for (int i = 0; i < max_digits && peek() >= '0' && peek() <= '7'; ++i) {
        value = value * 8 + uint32_t(peek() - '0');
        advance();
      }
      append_utf8(out, value);
      break;
    }
    case 'x': {
      int h1 = hex_value(peek());
      int h2 = hex_value(peek(1));
      if (h1 < 0 || h2 < 0) fail("Invalid hexadecimal escape");
      advance();
      advance();
      append_utf8(out, uint32_t(h1 * 16 + h2));
      break;
    }
    case 'u': {
      uint32_t cp = 0;
      if (peek() == '{') {
        advance();
        int count = 0;
        while (peek() != '}') {
          int h = hex_value(peek());
          if (h < 0 || ++count > 6) fail("Invalid unicode escape");
          cp = cp * 16 + uint32_t(h);
          advance();
        }
        advance();
      } else {
        for (int i = 0; i < 4; ++i) {
          int h = hex_value(peek());
          if (h < 0) fail("Invalid unicode escape");
          cp = cp * 16 + uint32_t(h);
          advance();
        }
        // Surrogate pair written as two escapes.
        if (cp >= 0xd800 && cp <= 0xdbff && peek() == '\\' && peek(1) == 'u') {
          uint32_t lo = 0;
          bool ok = true;
          for (int i = 0; i < 4; ++i) {
            int h = hex_value(peek(2 + i));
            if (h < 0) {
              ok = false;
              break;
            }
            lo = lo * 16 + uint32_t(h);
          }
          if (ok && lo >= 0xdc00 && lo <= 0xdfff) {
            for (int i = 0; i < 6; ++i) advance();
            cp = 0x10000 + ((cp - 0xd800) << 10) + (lo - 0xdc00);
          }
        }
      }
      append_utf8(out, cp);
      return cp;
    }
    case '\r':
      if (peek() == '\n') advance();
      break;
    case '\n':
      break;
    default:
      out.push_back(c);
  }
  return uint32_t(static_cast<unsigned char>(c));
}

Token Lexer::lex_string(char quote) {
  Token tok;
  tok.type = TokenType::String;
  start_token(tok);
  advance();
  while (true) {
    if (at_end() || peek() == '\n' || peek() == '\r') fail("Unterminated string literal");
    char c = peek();
    if (c == quote) {
      advance();
      break;
    }
    if (c == '\\') {
      advance();
      if (at_end()) fail("Unterminated string literal");
      read_escape(tok.value);
      continue;
    }
    tok.value.push_back(c);
    advance();
  }
  finish_token(tok);
  return tok;
}

uint32_t Lexer::skip_template_expression() {
  // Lex the embedded expression with the regular tokenizer so strings, regexes and nested
  // templates are skipped correctly; comments are collected again by the sub-parser.
  auto* saved_comments = comments_;
  comments_ = nullptr;
  has_last_ = false;
  int depth = 0;
  while (true) {
    Token tok = next();
    if (tok.type == TokenType::Eof) fail("Unterminated template expression");
    if (tok.type != TokenType::Punct) continue;
    if (tok.text == "{" || tok.text == "${") {
      ++depth;
    } else if (tok.text == "}") {
      if (depth == 0) {
        pos_ = tok.span.begin;
        line_ = tok.span.start_line;
        col_ = tok.span.start_col;
        comments_ = saved_comments;
        return pos_;
      }
      --depth;
    }
  }
}

Token Lexer::lex_template() {
  Token tok;
  tok.type = TokenType::Template;
  start_token(tok);
  advance();  // `
  TemplateChunk chunk;
  chunk.span.begin = pos_;
  chunk.span.start_line = line_;
  chunk.span.start_col = col_;
  auto close_chunk = [&] {
    chunk.span.end = pos_;
    chunk.span.end_line = line_;
    chunk.span.end_col = col_;
    tok.chunks.push_back(std::move(chunk));
    chunk = TemplateChunk{};
  };
  while (true) {
    if (at_end()) fail("Unterminated template literal");
    char c = peek();
    if (c == '`') {
      close_chunk();
      advance();
      break;
    }
    if (c == '$' && peek(1) == '{') {
      close_chunk();
      advance();
      advance();
      TemplateExpr expr;
      expr.begin = pos_;
      expr.line = line_;
      expr.col = col_;
      expr.end = skip_template_expression();
      tok.exprs.push_back(expr);
      advance();  // }
      chunk.span.begin = pos_;
      chunk.span.start_line = line_;
      chunk.span.start_col = col_;
      continue;
    }
    if (c == '\\') {
      uint32_t start = pos_;
      advance();
      if (at_end()) fail("Unterminated template literal");
      read_escape(chunk.cooked);
      chunk.raw.append(source_.substr(start, pos_ - start));
      continue;
    }
    if (c == '\r') {
      advance();
      if (peek() == '\n') advance();
      chunk.cooked.push_back('\n');
      chunk.raw.push_back('\n');
      continue;
    }
    chunk.cooked.push_back(c);
    chunk.raw.push_back(c);
    advance();
  }
  finish_token(tok);
  return tok;
}

Token Lexer::lex_regex() {
  Token tok;
  tok.type = TokenType::Regex;
  start_token(tok);
  advance();  // /
  bool in_class = false;
  while (true) {
    if (at_end() || peek() == '\n' || peek() == '\r') fail("Unterminated regular expression");
    char c = peek();
    if (c == '\\') {
      advance();
      if (at_end()) fail("Unterminated regular expression");
      advance();
      continue;
    }
    if (c == '[') in_class = true;
    if (c == ']') in_class = false;
    advance();
    if (c == '/' && !in_class) break;
  }
  while (!at_end() && std::isalpha(static_cast<unsigned char>(peek()))) advance();
  finish_token(tok);
  tok.value = tok.text;
  return tok;
}

Token Lexer::lex_punct() {
  Token tok;
  tok.type = TokenType::Punct;
  start_token(tok);
  std::string_view rest = source_.substr(pos_, end_ - pos_);
  for (auto p : kPunctuators) {
    if (rest.substr(0, p.size()) == p) {
      // `a?.5:1` is a conditional, not optional chaining.
      if (p == "?." && rest.size() > 2 && std::isdigit(static_cast<unsigned char>(rest[2]))) {
        continue;
      }
      for (size_t i = 0; i < p.size(); ++i) advance();
      finish_token(tok);
      return tok;
    }
  }
  if (kSinglePunct.find(peek()) != std::string_view::npos) {
    advance();
    finish_token(tok);
    return tok;
  }
  fail(std::string("Unexpected character '") + peek() + "'");
}

}  // namespace wscan::js::detail
