#include <deque>
#include <string>
#include <utility>

#include "lexer.hpp"
#include "wscan/ast.hpp"
#include "wscan/error.hpp"

namespace wscan::js {

namespace {

using detail::Lexer;
using detail::Token;
using detail::TokenType;

using NodePtr = std::unique_ptr<Node>;

bool is_reserved_word(std::string_view w) {
  static constexpr std::string_view kReserved[] = {
      "break",  "case",    "catch",  "class",  "const",      "continue", "debugger",
      "default", "delete", "do",     "else",   "export",     "extends",  "finally",
      "for",    "function", "if",    "import", "in",         "instanceof", "new",
      "return", "super",   "switch", "this",   "throw",      "try",      "typeof",
      "var",    "void",    "while",  "with",   "null",       "true",     "false"};
  for (auto r : kReserved) {
    if (r == w) return true;
  }
  return false;
}

int binary_precedence(const Token& tok, bool no_in) {
  if (tok.type == TokenType::Name) {
    if (tok.text == "instanceof") return 8;
    if (tok.text == "in") return no_in ? -1 : 8;
    return -1;
  }
  if (tok.type != TokenType::Punct) return -1;
  const std::string& op = tok.text;
  if (op == "??") return 1;
  if (op == "||") return 2;
  if (op == "&&") return 3;
  if (op == "|") return 4;
  if (op == "^") return 5;
  if (op == "&") return 6;
  if (op == "==" || op == "!=" || op == "===" || op == "!==") return 7;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 8;
  if (op == "<<" || op == ">>" || op == ">>>") return 9;
  if (op == "+" || op == "-") return 10;
  if (op == "*" || op == "/" || op == "%") return 11;
  if (op == "**") return 12;
  return -1;
}

bool is_assignment_operator(const Token& tok) {
  if (tok.type != TokenType::Punct) return false;
  static constexpr std::string_view kOps[] = {"=",   "+=",  "-=",  "*=",  "/=",   "%=",
                                              "**=", "<<=", ">>=", ">>>=", "&=",  "|=",
                                              "^=",  "&&=", "||=", "?\?="};
  for (auto op : kOps) {
    if (tok.text == op) return true;
  }
  return false;
}

class Parser {
 public:
  Parser(std::string_view source, uint32_t begin, uint32_t end, int line, int col,
         std::vector<Comment>* comments)
      : source_(source), lexer_(source, begin, end, line, col, comments), comments_(comments) {
    prev_end_.begin = begin;
    prev_end_.end = begin;
    prev_end_.end_line = line;
    prev_end_.end_col = col;
  }

  NodePtr parse_program() {
    auto program = std::make_unique<Node>();
    program->kind = NodeKind::Program;
    const Token& first = peek();
    program->span.begin = 0;
    program->span.start_line = 1;
    program->span.start_col = 1;
    (void)first;
    while (peek().type != TokenType::Eof) {
      program->children.push_back(parse_statement());
    }
    const Token& eof = peek();
    program->span.end = eof.span.end;
    program->span.end_line = eof.span.end_line;
    program->span.end_col = eof.span.end_col;
    return program;
  }

  NodePtr parse_standalone_expression() {
    NodePtr expr = parse_expression(false);
    if (peek().type != TokenType::Eof) unexpected(peek());
    return expr;
  }

 private:
  // ---- token plumbing ----
  const Token& peek(size_t ahead = 0) {
    while (buffer_.size() <= ahead) buffer_.push_back(lexer_.next());
    return buffer_[ahead];
  }

  Token take() {
    peek();
    Token tok = std::move(buffer_.front());
    buffer_.pop_front();
    prev_end_ = tok.span;
    return tok;
  }

  bool at(std::string_view punct) { return peek().is(punct); }
  bool at_name(std::string_view name) { return peek().is_name(name); }

  bool eat(std::string_view punct) {
    if (!at(punct)) return false;
    take();
    return true;
  }

  [[noreturn]] void unexpected(const Token& tok) {
    if (tok.type == TokenType::Eof) {
      if (!open_.empty()) {
        throw ParseFailure(ErrorCode::kParseError,
                           "Unexpected end of input; unclosed '" + open_.back().second + "'",
                           open_.back().first.start_line, open_.back().first.start_col);
      }
      throw ParseFailure(ErrorCode::kParseError, "Unexpected end of input", tok.span.start_line,
                         tok.span.start_col);
    }
    throw ParseFailure(ErrorCode::kParseError, "Unexpected token '" + tok.text + "'",
                       tok.span.start_line, tok.span.start_col);
  }

  [[noreturn]] void unsupported(const Token& tok, const std::string& what) {
    throw ParseFailure(ErrorCode::kParseUnsupported, "Unsupported construct: " + what,
                       tok.span.start_line, tok.span.start_col);
  }

  Token expect(std::string_view punct) {
    if (!at(punct)) unexpected(peek());
    return take();
  }

  Token open(std::string_view punct) {
    Token tok = expect(punct);
    open_.emplace_back(tok.span, std::string(punct));
    return tok;
  }

  Token close(std::string_view punct) {
    Token tok = expect(punct);
    if (!open_.empty()) open_.pop_back();
    return tok;
  }

  Token expect_name() {
    if (peek().type != TokenType::Name) unexpected(peek());
    return take();
  }

  void consume_semicolon() {
    if (eat(";")) return;
    const Token& tok = peek();
    if (tok.is("}") || tok.type == TokenType::Eof || tok.newline_before) return;
    unexpected(tok);
  }

  NodePtr make(NodeKind kind, const Span& start) {
    auto node = std::make_unique<Node>();
    node->kind = kind;
    node->span.begin = start.begin;
    node->span.start_line = start.start_line;
    node->span.start_col = start.start_col;
    return node;
  }

  NodePtr finish(NodePtr node) {
    node->span.end = prev_end_.end;
    node->span.end_line = prev_end_.end_line;
    node->span.end_col = prev_end_.end_col;
    return node;
  }

  NodePtr empty_at(const Span& where) {
    auto node = make(NodeKind::EmptyStatement, where);
    node->span.end = where.begin;
    node->span.end_line = where.start_line;
    node->span.end_col = where.start_col;
    return node;
  }

  NodePtr identifier(const Token& tok) {
    auto node = make(NodeKind::Identifier, tok.span);
    node->name = tok.text;
    node->span = tok.span;
    return node;
  }

  // ---- statements ----
  NodePtr parse_statement() {
    const Token& tok = peek();
    if (tok.type == TokenType::Punct) {
      if (tok.text == "{") return parse_block();
      if (tok.text == ";") {
        Token t = take();
        return finish(make(NodeKind::EmptyStatement, t.span));
      }
    }
    if (tok.type == TokenType::Name) {
      const std::string& w = tok.text;
      if (w == "var" || w == "const") return parse_variable_statement();
      if (w == "let") {
        const Token& next = peek(1);
        if (next.type == TokenType::Name || next.is("[") || next.is("{")) {
          return parse_variable_statement();
        }
      }
      if (w == "function") return parse_function(NodeKind::FunctionDeclaration, false, tok.span);
      if (w == "async" && peek(1).is_name("function") && !peek(1).newline_before) {
        Span start = take().span;
        return parse_function(NodeKind::FunctionDeclaration, true, start);
      }
      if (w == "if") return parse_if();
      if (w == "for") return parse_for();
      if (w == "while") return parse_while();
      if (w == "do") return parse_do_while();
      if (w == "return") return parse_return();
      if (w == "break" || w == "continue") return parse_break_continue();
      if (w == "throw") return parse_throw();
      if (w == "try") return parse_try();
      if (w == "switch") return parse_switch();
      if (w == "class") unsupported(tok, "class declaration");
      if (w == "import" && !peek(1).is("(")) unsupported(tok, "import declaration");
      if (w == "export") unsupported(tok, "export declaration");
      if (w == "with") unsupported(tok, "with statement");
      if (w == "debugger") unsupported(tok, "debugger statement");
      if (!is_reserved_word(w) && peek(1).is(":")) unsupported(tok, "labeled statement");
    }
    Span start = tok.span;
    auto stmt = make(NodeKind::ExpressionStatement, start);
    stmt->children.push_back(parse_expression(false));
    consume_semicolon();
    return finish(std::move(stmt));
  }

  NodePtr parse_block() {
    Token brace = open("{");
    auto block = make(NodeKind::BlockStatement, brace.span);
    while (!at("}")) {
      if (peek().type == TokenType::Eof) unexpected(peek());
      block->children.push_back(parse_statement());
    }
    close("}");
    return finish(std::move(block));
  }

  NodePtr parse_variable_declaration(bool no_in) {
    Token kw = take();
    auto decl = make(NodeKind::VariableDeclaration, kw.span);
    decl->name = kw.text;
    do {
      Span start = peek().span;
      auto declarator = make(NodeKind::VariableDeclarator, start);
      declarator->children.push_back(parse_binding_target());
      if (eat("=")) declarator->children.push_back(parse_assignment(no_in));
      decl->children.push_back(finish(std::move(declarator)));
    } while (eat(","));
    return finish(std::move(decl));
  }

  NodePtr parse_variable_statement() {
    auto decl = parse_variable_declaration(false);
    consume_semicolon();
    return finish(std::move(decl));
  }

  NodePtr parse_if() {
    Token kw = take();
    auto node = make(NodeKind::IfStatement, kw.span);
    open("(");
    node->children.push_back(parse_expression(false));
    close(")");
    node->children.push_back(parse_statement());
    if (at_name("else")) {
      take();
      node->children.push_back(parse_statement());
    }
    return finish(std::move(node));
  }

  NodePtr parse_for() {
    Token kw = take();
    if (at_name("await")) unsupported(peek(), "for await");
    Token paren = open("(");
    NodePtr init;
    if (at(";")) {
      init = empty_at(peek().span);
    } else if (at_name("var") || at_name("const") ||
               (at_name("let") && (peek(1).type == TokenType::Name || peek(1).is("[") ||
                                   peek(1).is("{")))) {
      init = parse_variable_declaration(true);
    } else {
      init = parse_expression(true);
    }
    if (at_name("in") || at_name("of")) {
      Token op = take();
      if (init->kind == NodeKind::ObjectLiteral || init->kind == NodeKind::ArrayLiteral) {
        to_pattern(*init);
      }
      auto node = make(NodeKind::ForInStatement, kw.span);
      node->name = op.text;
      node->children.push_back(std::move(init));
      node->children.push_back(op.text == "of" ? parse_assignment(false) : parse_expression(false));
      close(")");
      node->children.push_back(parse_statement());
      return finish(std::move(node));
    }
    auto node = make(NodeKind::ForStatement, kw.span);
    node->children.push_back(std::move(init));
    expect(";");
    node->children.push_back(at(";") ? empty_at(peek().span) : parse_expression(false));
    expect(";");
    node->children.push_back(at(")") ? empty_at(peek().span) : parse_expression(false));
    close(")");
    (void)paren;
    node->children.push_back(parse_statement());
    return finish(std::move(node));
  }

  NodePtr parse_while() {
    Token kw = take();
    auto node = make(NodeKind::WhileStatement, kw.span);
    open("(");
    node->children.push_back(parse_expression(false));
    close(")");
    node->children.push_back(parse_statement());
    return finish(std::move(node));
  }

  NodePtr parse_do_while() {
    Token kw = take();
    auto node = make(NodeKind::DoWhileStatement, kw.span);
    node->children.push_back(parse_statement());
    if (!at_name("while")) unexpected(peek());
    take();
    open("(");
    node->children.push_back(parse_expression(false));
    close(")");
    eat(";");
    return finish(std::move(node));
  }

  NodePtr parse_return() {
    Token kw = take();
    auto node = make(NodeKind::ReturnStatement, kw.span);
    const Token& next = peek();
    if (!next.is(";") && !next.is("}") && next.type != TokenType::Eof && !next.newline_before) {
      node->children.push_back(parse_expression(false));
    }
    consume_semicolon();
    return finish(std::move(node));
  }

  NodePtr parse_break_continue() {
    Token kw = take();
    auto node = make(kw.text == "break" ? NodeKind::BreakStatement : NodeKind::ContinueStatement,
                     kw.span);
    if (peek().type == TokenType::Name && !peek().newline_before && !is_reserved_word(peek().text)) {
      unsupported(peek(), "labeled " + kw.text);
    }
    consume_semicolon();
    return finish(std::move(node));
  }

  NodePtr parse_throw() {
    Token kw = take();
    if (peek().newline_before) unexpected(peek());
    auto node = make(NodeKind::ThrowStatement, kw.span);
    node->children.push_back(parse_expression(false));
    consume_semicolon();
    return finish(std::move(node));
  }

  NodePtr parse_try() {
    Token kw = take();
    auto node = make(NodeKind::TryStatement, kw.span);
    node->children.push_back(parse_block());
    bool handled = false;
    if (at_name("catch")) {
      Token c = take();
      auto clause = make(NodeKind::CatchClause, c.span);
      if (at("(")) {
        open("(");
        clause->children.push_back(parse_binding_target());
        close(")");
      }
      clause->children.push_back(parse_block());
      node->children.push_back(finish(std::move(clause)));
      handled = true;
    }
    if (at_name("finally")) {
      take();
      node->children.push_back(parse_block());
      handled = true;
    }
    if (!handled) unexpected(peek());
    return finish(std::move(node));
  }

  NodePtr parse_switch() {
    Token kw = take();
    auto node = make(NodeKind::SwitchStatement, kw.span);
    open("(");
    node->children.push_back(parse_expression(false));
    close(")");
    open("{");
    while (!at("}")) {
      const Token& t = peek();
      auto clause = make(NodeKind::SwitchCase, t.span);
      if (t.is_name("case")) {
        take();
        clause->name = "case";
        clause->children.push_back(parse_expression(false));
      } else if (t.is_name("default")) {
        take();
        clause->name = "default";
      } else {
        unexpected(t);
      }
      expect(":");
      while (!at("}") && !at_name("case") && !at_name("default")) {
        if (peek().type == TokenType::Eof) unexpected(peek());
        clause->children.push_back(parse_statement());
      }
      node->children.push_back(finish(std::move(clause)));
    }
    close("}");
    return finish(std::move(node));
  }

  // ---- functions ----
  NodePtr parse_function(NodeKind kind, bool is_async, const Span& start) {
    take();  // function
    if (at("*")) unsupported(peek(), "generator function");
    auto fn = make(kind, start);
    if (is_async) fn->flags |= kAsync;
    if (peek().type == TokenType::Name && !at("(")) {
      Token name = take();
      if (is_reserved_word(name.text)) unexpected(name);
      fn->name = name.text;
    } else if (kind == NodeKind::FunctionDeclaration) {
      unexpected(peek());
    }
    parse_params(*fn);
    fn->children.push_back(parse_block());
    return finish(std::move(fn));
  }

  void parse_params(Node& fn) {
    open("(");
    while (!at(")")) {
      if (at("...")) {
        Token dots = take();
        auto rest = make(NodeKind::SpreadElement, dots.span);
        rest->children.push_back(parse_binding_target());
        fn.children.push_back(finish(std::move(rest)));
      } else {
        fn.children.push_back(parse_binding_element());
      }
      if (!at(")")) expect(",");
    }
    close(")");
  }

  bool arrow_ahead(size_t offset) {
    // peek(offset) is "(": find the matching ")" and test for "=>".
    int depth = 0;
    for (size_t i = offset;; ++i) {
      const Token& t = peek(i);
      if (t.type == TokenType::Eof) return false;
      if (t.type != TokenType::Punct) continue;
      if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
      if (t.text == ")" || t.text == "]" || t.text == "}") {
        if (--depth == 0) {
          const Token& after = peek(i + 1);
          return after.is("=>") && !after.newline_before;
        }
      }
    }
  }

  NodePtr parse_arrow(bool is_async, const Span& start, bool no_in) {
    auto fn = make(NodeKind::ArrowFunction, start);
    if (is_async) fn->flags |= kAsync;
    if (at("(")) {
      parse_params(*fn);
    } else {
      fn->children.push_back(identifier(expect_name()));
    }
    expect("=>");
    if (at("{")) {
      fn->children.push_back(parse_block());
    } else {
      fn->flags |= kExpressionBody;
      fn->children.push_back(parse_assignment(no_in));
    }
    return finish(std::move(fn));
  }

  // ---- binding patterns ----
  NodePtr parse_binding_target() {
    const Token& tok = peek();
    if (tok.is("[")) {
      Token open_tok = open("[");
      auto pattern = make(NodeKind::ArrayPattern, open_tok.span);
      while (!at("]")) {
        if (at(",")) {
          Token comma = take();
          pattern->children.push_back(empty_elision(comma.span));
          continue;
        }
        if (at("...")) {
          Token dots = take();
          auto rest = make(NodeKind::SpreadElement, dots.span);
          rest->children.push_back(parse_binding_target());
          pattern->children.push_back(finish(std::move(rest)));
        } else {
          pattern->children.push_back(parse_binding_element());
        }
        if (!at("]")) expect(",");
      }
      close("]");
      return finish(std::move(pattern));
    }
    if (tok.is("{")) {
      Token open_tok = open("{");
      auto pattern = make(NodeKind::ObjectPattern, open_tok.span);
      while (!at("}")) {
        if (at("...")) {
          Token dots = take();
          auto rest = make(NodeKind::SpreadElement, dots.span);
          rest->children.push_back(identifier(expect_name()));
          pattern->children.push_back(finish(std::move(rest)));
        } else {
          Span start = peek().span;
          auto prop = make(NodeKind::Property, start);
          bool computed = false;
          NodePtr key = parse_property_key(*prop, computed);
          if (eat(":")) {
            prop->children.push_back(std::move(key));
            prop->children.push_back(parse_binding_element());
          } else {
            if (computed || key->kind != NodeKind::Identifier) unexpected(peek());
            prop->flags |= kShorthand;
            auto value = identifier_copy(*key);
            if (at("=")) {
              take();
              auto assign = make(NodeKind::AssignmentPattern, value->span);
              assign->children.push_back(std::move(value));
              assign->children.push_back(parse_assignment(false));
              value = finish(std::move(assign));
            }
            prop->children.push_back(std::move(key));
            prop->children.push_back(std::move(value));
          }
          pattern->children.push_back(finish(std::move(prop)));
        }
        if (!at("}")) expect(",");
      }
      close("}");
      return finish(std::move(pattern));
    }
    Token name = expect_name();
    if (is_reserved_word(name.text)) unexpected(name);
    return identifier(name);
  }

  NodePtr parse_binding_element() {
    Span start = peek().span;
    NodePtr target = parse_binding_target();
    if (!at("=")) return target;
    take();
    auto assign = make(NodeKind::AssignmentPattern, start);
    assign->children.push_back(std::move(target));
    assign->children.push_back(parse_assignment(false));
    return finish(std::move(assign));
  }

  NodePtr empty_elision(const Span& at_span) {
    auto node = make(NodeKind::Elision, at_span);
    node->span.end = at_span.begin;
    node->span.end_line = at_span.start_line;
    node->span.end_col = at_span.start_col;
    return node;
  }

  NodePtr identifier_copy(const Node& key) {
    auto node = std::make_unique<Node>();
    node->kind = NodeKind::Identifier;
    node->name = key.name;
    node->span = key.span;
    return node;
  }

  // Converts an expression parsed under the cover grammar into an assignment target.
  void to_pattern(Node& node) {
    switch (node.kind) {
      case NodeKind::Identifier:
      case NodeKind::MemberExpression:
        return;
      case NodeKind::ObjectLiteral:
        node.kind = NodeKind::ObjectPattern;
        for (auto& child : node.children) {
          if (child->kind == NodeKind::Property) {
            if (child->has(kMethod)) fail_pattern(*child);
            to_pattern(*child->children[1]);
          } else if (child->kind == NodeKind::SpreadElement) {
            to_pattern(*child->children[0]);
          }
        }
        return;
      case NodeKind::ArrayLiteral:
        node.kind = NodeKind::ArrayPattern;
        for (auto& child : node.children) {
          if (child->kind == NodeKind::Elision) continue;
          if (child->kind == NodeKind::SpreadElement) {
            to_pattern(*child->children[0]);
          } else {
            to_pattern(*child);
          }
        }
        return;
      case NodeKind::AssignmentExpression:
        if (node.name != "=") fail_pattern(node);
        node.kind = NodeKind::AssignmentPattern;
        node.name.clear();
        to_pattern(*node.children[0]);
        return;
      case NodeKind::AssignmentPattern:
        return;
      default:
        fail_pattern(node);
    }
  }

  [[noreturn]] void fail_pattern(const Node& node) {
    throw ParseFailure(ErrorCode::kParseError, "Invalid assignment target", node.span.start_line,
                       node.span.start_col);
  }

  // Cover-grammar-only `{a = 1}` shorthand must not survive into an expression.
  void check_no_cover_initializer(const Node& node) {
    if (node.kind == NodeKind::ObjectLiteral) {
      for (const auto& child : node.children) {
        if (child->kind == NodeKind::Property && child->has(kShorthand) &&
            child->children[1]->kind == NodeKind::AssignmentPattern) {
          throw ParseFailure(ErrorCode::kParseError, "Invalid shorthand property initializer",
                             child->span.start_line, child->span.start_col);
        }
      }
    }
  }

  // ---- expressions ----
  NodePtr parse_expression(bool no_in) {
    Span start = peek().span;
    NodePtr first = parse_assignment(no_in);
    if (!at(",")) return first;
    auto seq = make(NodeKind::SequenceExpression, start);
    seq->children.push_back(std::move(first));
    while (eat(",")) seq->children.push_back(parse_assignment(no_in));
    return finish(std::move(seq));
  }

  NodePtr parse_assignment(bool no_in) {
    const Token& tok = peek();
    Span start = tok.span;
    if (tok.type == TokenType::Name) {
      if (tok.text == "yield") unsupported(tok, "yield");
      if (tok.text == "async" && !peek(1).newline_before) {
        if (peek(1).type == TokenType::Name && peek(2).is("=>") && !peek(1).is_name("function")) {
          take();
          return parse_arrow(true, start, no_in);
        }
        if (peek(1).is("(") && arrow_ahead(1)) {
          take();
          return parse_arrow(true, start, no_in);
        }
      }
      if (!is_reserved_word(tok.text) && peek(1).is("=>") && !peek(1).newline_before) {
        return parse_arrow(false, start, no_in);
      }
    } else if (tok.is("(") && arrow_ahead(0)) {
      return parse_arrow(false, start, no_in);
    }

    NodePtr left = parse_conditional(no_in);
    if (!is_assignment_operator(peek())) {
      check_no_cover_initializer(*left);
      return left;
    }
    Token op = take();
    if (op.text == "=") {
      to_pattern(*left);
    } else if (left->kind != NodeKind::Identifier && left->kind != NodeKind::MemberExpression) {
      fail_pattern(*left);
    }
    auto node = make(NodeKind::AssignmentExpression, start);
    node->name = op.text;
    node->children.push_back(std::move(left));
    node->children.push_back(parse_assignment(no_in));
    return finish(std::move(node));
  }

  NodePtr parse_conditional(bool no_in) {
    Span start = peek().span;
    NodePtr test = parse_binary(0, no_in);
    if (!at("?")) return test;
    check_no_cover_initializer(*test);
    take();
    auto node = make(NodeKind::ConditionalExpression, start);
    node->children.push_back(std::move(test));
    node->children.push_back(parse_assignment(false));
    expect(":");
    node->children.push_back(parse_assignment(no_in));
    return finish(std::move(node));
  }

  NodePtr parse_binary(int min_prec, bool no_in) {
    Span start = peek().span;
    NodePtr left = parse_unary();
    while (true) {
      int prec = binary_precedence(peek(), no_in);
      if (prec < 0 || prec < min_prec) break;
      check_no_cover_initializer(*left);
      Token op = take();
      // ** is right-associative; everything else is left-associative.
      NodePtr right = parse_binary(op.text == "**" ? prec : prec + 1, no_in);
      check_no_cover_initializer(*right);
      auto node = make(NodeKind::BinaryExpression, start);
      node->name = op.text;
      node->children.push_back(std::move(left));
      node->children.push_back(std::move(right));
      left = finish(std::move(node));
    }
    return left;
  }

  NodePtr parse_unary() {
    const Token& tok = peek();
    Span start = tok.span;
    bool prefix_op = false;
    if (tok.type == TokenType::Punct) {
      prefix_op = tok.text == "!" || tok.text == "~" || tok.text == "+" || tok.text == "-" ||
                  tok.text == "++" || tok.text == "--";
    } else if (tok.type == TokenType::Name) {
      prefix_op = tok.text == "typeof" || tok.text == "void" || tok.text == "delete";
      if (tok.text == "await") {
        take();
        auto node = make(NodeKind::AwaitExpression, start);
        node->children.push_back(parse_unary());
        return finish(std::move(node));
      }
    }
    if (prefix_op) {
      Token op = take();
      auto node = make(NodeKind::UnaryExpression, start);
      node->name = op.text;
      node->flags |= kPrefix;
      NodePtr arg = parse_unary();
      if ((op.text == "++" || op.text == "--") && arg->kind != NodeKind::Identifier &&
          arg->kind != NodeKind::MemberExpression) {
        fail_pattern(*arg);
      }
      node->children.push_back(std::move(arg));
      return finish(std::move(node));
    }
    NodePtr expr = parse_lhs();
    if ((at("++") || at("--")) && !peek().newline_before) {
      if (expr->kind != NodeKind::Identifier && expr->kind != NodeKind::MemberExpression) {
        fail_pattern(*expr);
      }
      Token op = take();
      auto node = make(NodeKind::UnaryExpression, start);
      node->name = op.text;
      node->children.push_back(std::move(expr));
      return finish(std::move(node));
    }
    return expr;
  }

  NodePtr parse_arguments(NodePtr call) {
    open("(");
    while (!at(")")) {
      if (at("...")) {
        Token dots = take();
        auto spread = make(NodeKind::SpreadElement, dots.span);
        spread->children.push_back(parse_assignment(false));
        call->children.push_back(finish(std::move(spread)));
      } else {
        call->children.push_back(parse_assignment(false));
      }
      if (!at(")")) expect(",");
    }
    close(")");
    return finish(std::move(call));
  }

  NodePtr member_access(NodePtr object, const Span& start, bool optional) {
    auto member = make(NodeKind::MemberExpression, start);
    if (optional) member->flags |= kOptional;
    if (at("[")) {
      open("[");
      member->flags |= kComputed;
      member->children.push_back(std::move(object));
      member->children.push_back(parse_expression(false));
      close("]");
      return finish(std::move(member));
    }
    if (at("#")) unsupported(peek(), "private field");
    Token name = expect_name();
    member->children.push_back(std::move(object));
    member->children.push_back(identifier(name));
    return finish(std::move(member));
  }

  NodePtr parse_new() {
    Token kw = take();
    if (at(".")) unsupported(kw, "new.target");
    Span start = kw.span;
    NodePtr callee;
    if (at_name("new")) {
      callee = parse_new();
    } else {
      callee = parse_primary();
    }
    Span callee_start = callee->span;
    while (true) {
      if (at(".")) {
        take();
        callee = member_access(std::move(callee), callee_start, false);
      } else if (at("[")) {
        callee = member_access(std::move(callee), callee_start, false);
      } else if (peek().type == TokenType::Template) {
        unsupported(peek(), "tagged template");
      } else {
        break;
      }
    }
    auto node = make(NodeKind::NewExpression, start);
    node->children.push_back(std::move(callee));
    if (at("(")) return parse_arguments(std::move(node));
    return finish(std::move(node));
  }

  NodePtr parse_lhs() {
    Span start = peek().span;
    NodePtr expr = at_name("new") ? parse_new() : parse_primary();
    while (true) {
      if (at(".")) {
        take();
        expr = member_access(std::move(expr), start, false);
      } else if (at("?.")) {
        take();
        if (at("(")) {
          auto call = make(NodeKind::CallExpression, start);
          call->flags |= kOptional;
          call->children.push_back(std::move(expr));
          expr = parse_arguments(std::move(call));
        } else {
          expr = member_access(std::move(expr), start, true);
        }
      } else if (at("[")) {
        expr = member_access(std::move(expr), start, false);
      } else if (at("(")) {
        auto call = make(NodeKind::CallExpression, start);
        call->children.push_back(std::move(expr));
        expr = parse_arguments(std::move(call));
      } else if (peek().type == TokenType::Template) {
        unsupported(peek(), "tagged template");
      } else {
        break;
      }
    }
    return expr;
  }

  NodePtr literal_from(const Token& tok) {
    auto node = make(NodeKind::Literal, tok.span);
    node->span = tok.span;
    node->raw = tok.text;
    switch (tok.type) {
      case TokenType::Number:
        node->literal_type = LiteralType::Number;
        node->number_value = tok.number;
        break;
      case TokenType::String:
        node->literal_type = LiteralType::String;
        node->string_value = tok.value;
        break;
      case TokenType::Regex:
        node->literal_type = LiteralType::Regex;
        node->string_value = tok.text;
        break;
      default:
        break;
    }
    return node;
  }

  NodePtr parse_template(const Token& tok) {
    auto node = make(NodeKind::TemplateLiteral, tok.span);
    node->span = tok.span;
    for (size_t i = 0; i < tok.chunks.size(); ++i) {
      const auto& chunk = tok.chunks[i];
      auto quasi = std::make_unique<Node>();
      quasi->kind = NodeKind::Literal;
      quasi->literal_type = LiteralType::String;
      quasi->string_value = chunk.cooked;
      quasi->raw = chunk.raw;
      quasi->span = chunk.span;
      node->children.push_back(std::move(quasi));
      if (i < tok.exprs.size()) {
        const auto& e = tok.exprs[i];
        Parser sub(source_, e.begin, e.end, e.line, e.col, comments_);
        node->children.push_back(sub.parse_standalone_expression());
      }
    }
    return node;
  }

  NodePtr parse_property_key(Node& prop, bool& computed) {
    const Token& tok = peek();
    computed = false;
    if (tok.is("[")) {
      open("[");
      computed = true;
      prop.flags |= kComputed;
      NodePtr key = parse_assignment(false);
      close("]");
      return key;
    }
    if (tok.type == TokenType::Name) {
      Token name = take();
      prop.name = name.text;
      return identifier(name);
    }
    if (tok.type == TokenType::String || tok.type == TokenType::Number) {
      Token lit = take();
      prop.name = lit.type == TokenType::String ? lit.value : lit.text;
      return literal_from(lit);
    }
    unexpected(tok);
  }

  NodePtr parse_object_literal() {
    Token open_tok = open("{");
    auto obj = make(NodeKind::ObjectLiteral, open_tok.span);
    while (!at("}")) {
      if (at("...")) {
        Token dots = take();
        auto spread = make(NodeKind::SpreadElement, dots.span);
        spread->children.push_back(parse_assignment(false));
        obj->children.push_back(finish(std::move(spread)));
      } else {
        obj->children.push_back(parse_property());
      }
      if (!at("}")) expect(",");
    }
    close("}");
    return finish(std::move(obj));
  }

  NodePtr parse_property() {
    Span start = peek().span;
    auto prop = make(NodeKind::Property, start);
    const Token& first = peek();
    auto is_key_start = [](const Token& t) {
      return t.type == TokenType::Name || t.type == TokenType::String ||
             t.type == TokenType::Number || t.is("[");
    };
    if (first.is("*")) unsupported(first, "generator method");
    if ((first.is_name("get") || first.is_name("set")) && is_key_start(peek(1))) {
      unsupported(first, "accessor property");
    }
    bool is_async = false;
    if (first.is_name("async") && is_key_start(peek(1)) && !peek(1).newline_before) {
      take();
      is_async = true;
      if (at("*")) unsupported(peek(), "async generator method");
    }
    bool computed = false;
    NodePtr key = parse_property_key(*prop, computed);
    if (at("(")) {
      auto fn = make(NodeKind::FunctionExpression, key->span);
      fn->flags |= kMethod;
      if (is_async) fn->flags |= kAsync;
      parse_params(*fn);
      fn->children.push_back(parse_block());
      prop->flags |= kMethod;
      prop->children.push_back(std::move(key));
      prop->children.push_back(finish(std::move(fn)));
      return finish(std::move(prop));
    }
    if (is_async) unexpected(peek());
    if (eat(":")) {
      prop->children.push_back(std::move(key));
      prop->children.push_back(parse_assignment(false));
      return finish(std::move(prop));
    }
    if (computed || key->kind != NodeKind::Identifier) unexpected(peek());
    if (is_reserved_word(key->name) && key->name != "this") unexpected(peek());
    prop->flags |= kShorthand;
    auto value = identifier_copy(*key);
    if (at("=")) {
      take();
      auto assign = make(NodeKind::AssignmentPattern, value->span);
      assign->children.push_back(std::move(value));
      assign->children.push_back(parse_assignment(false));
      value = finish(std::move(assign));
    }
    prop->children.push_back(std::move(key));
    prop->children.push_back(std::move(value));
    return finish(std::move(prop));
  }

  NodePtr parse_array_literal() {
    Token open_tok = open("[");
    auto arr = make(NodeKind::ArrayLiteral, open_tok.span);
    while (!at("]")) {
      if (at(",")) {
        Token comma = take();
        arr->children.push_back(empty_elision(comma.span));
        continue;
      }
      if (at("...")) {
        Token dots = take();
        auto spread = make(NodeKind::SpreadElement, dots.span);
        spread->children.push_back(parse_assignment(false));
        arr->children.push_back(finish(std::move(spread)));
      } else {
        arr->children.push_back(parse_assignment(false));
      }
      if (!at("]")) expect(",");
    }
    close("]");
    return finish(std::move(arr));
  }

  NodePtr parse_primary() {
    const Token& tok = peek();
    switch (tok.type) {
      case TokenType::Eof:
        unexpected(tok);
      case TokenType::Number:
      case TokenType::String:
      case TokenType::Regex:
        return literal_from(take());
      case TokenType::Template: {
        Token t = take();
        return parse_template(t);
      }
      case TokenType::Punct: {
        if (tok.is("(")) {
          open("(");
          NodePtr inner = parse_expression(false);
          close(")");
          return inner;
        }
        if (tok.is("[")) return parse_array_literal();
        if (tok.is("{")) return parse_object_literal();
        if (tok.is("#") || tok.is("@")) unsupported(tok, "private name or decorator");
        unexpected(tok);
      }
      case TokenType::Name:
        break;
    }
    const std::string& w = tok.text;
    if (w == "this") {
      Token t = take();
      auto node = make(NodeKind::ThisExpression, t.span);
      node->span = t.span;
      return node;
    }
    if (w == "true" || w == "false" || w == "null") {
      Token t = take();
      auto node = make(NodeKind::Literal, t.span);
      node->span = t.span;
      node->raw = t.text;
      if (w == "null") {
        node->literal_type = LiteralType::Null;
      } else {
        node->literal_type = LiteralType::Boolean;
        node->bool_value = w == "true";
      }
      return node;
    }
    if (w == "function") return parse_function(NodeKind::FunctionExpression, false, tok.span);
    if (w == "async" && peek(1).is_name("function") && !peek(1).newline_before) {
      Span start = take().span;
      return parse_function(NodeKind::FunctionExpression, true, start);
    }
    if (w == "class") unsupported(tok, "class expression");
    if (w == "super") unsupported(tok, "super");
    if (w == "import") unsupported(tok, "dynamic import");
    if (w == "yield") unsupported(tok, "yield");
    if (is_reserved_word(w)) unexpected(tok);
    return identifier(take());
  }

  std::string_view source_;
  Lexer lexer_;
  std::vector<Comment>* comments_;
  std::deque<Token> buffer_;
  Span prev_end_;
  std::vector<std::pair<Span, std::string>> open_;
};

void link(Node& node, Node* parent, int& next_id, std::vector<const Node*>& by_id) {
  node.parent = parent;
  node.id = next_id++;
  by_id.push_back(&node);
  for (auto& child : node.children) link(*child, &node, next_id, by_id);
}

}  // namespace

Ast::Ast(std::string file_path, std::unique_ptr<Node> program, std::vector<Comment> comments)
    : file_path_(std::move(file_path)), program_(std::move(program)), comments_(std::move(comments)) {
  renumber();
}

void Ast::renumber() {
  by_id_.clear();
  int next_id = 0;
  link(*program_, nullptr, next_id, by_id_);
}

const Node* Ast::node(int id) const {
  if (id < 0 || size_t(id) >= by_id_.size()) return nullptr;
  return by_id_[size_t(id)];
}

Ast parse_script(std::string_view source, std::string file_path) {
  std::vector<Comment> comments;
  Parser parser(source, 0, uint32_t(source.size()), 1, 1, &comments);
  auto program = parser.parse_program();
  return Ast(std::move(file_path), std::move(program), std::move(comments));
}

std::vector<const Node*> walk(const Ast& ast, WalkOrder order) {
  std::vector<const Node*> out;
  out.reserve(ast.size());
  if (order == WalkOrder::Pre) {
    visit_pre(ast.program(), [&out](const Node& n) { out.push_back(&n); });
    return out;
  }
  // Iterative post-order so deep trees don't exhaust the stack.
  std::vector<std::pair<const Node*, size_t>> stack;
  stack.emplace_back(&ast.program(), 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->children.size()) {
      const Node* child = node->children[next++].get();
      stack.emplace_back(child, 0);
    } else {
      out.push_back(node);
      stack.pop_back();
    }
  }
  return out;
}

std::optional<std::string> member_path(const Node& node) {
  if (node.kind != NodeKind::MemberExpression) return std::nullopt;
  std::vector<const std::string*> parts;
  const Node* cur = &node;
  while (cur->kind == NodeKind::MemberExpression) {
    if (cur->has(kComputed)) return std::nullopt;
    parts.push_back(&cur->children[1]->name);
    cur = cur->children[0].get();
  }
  std::string path;
  if (cur->kind == NodeKind::Identifier) {
    path = cur->name;
  } else if (cur->kind == NodeKind::ThisExpression) {
    path = "this";
  } else {
    return std::nullopt;
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    path += '.';
    path += **it;
  }
  return path;
}

std::string_view kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Program: return "Program";
    case NodeKind::FunctionDeclaration: return "FunctionDeclaration";
    case NodeKind::FunctionExpression: return "FunctionExpression";
    case NodeKind::ArrowFunction: return "ArrowFunction";
    case NodeKind::VariableDeclaration: return "VariableDeclaration";
    case NodeKind::VariableDeclarator: return "VariableDeclarator";
    case NodeKind::AssignmentExpression: return "AssignmentExpression";
    case NodeKind::CallExpression: return "CallExpression";
    case NodeKind::MemberExpression: return "MemberExpression";
    case NodeKind::Identifier: return "Identifier";
    case NodeKind::Literal: return "Literal";
    case NodeKind::ObjectLiteral: return "ObjectLiteral";
    case NodeKind::Property: return "Property";
    case NodeKind::ReturnStatement: return "ReturnStatement";
    case NodeKind::IfStatement: return "IfStatement";
    case NodeKind::BlockStatement: return "BlockStatement";
    case NodeKind::BinaryExpression: return "BinaryExpression";
    case NodeKind::TemplateLiteral: return "TemplateLiteral";
    case NodeKind::NewExpression: return "NewExpression";
    case NodeKind::ThisExpression: return "ThisExpression";
    case NodeKind::ArrayLiteral: return "ArrayLiteral";
    case NodeKind::ConditionalExpression: return "ConditionalExpression";
    case NodeKind::UnaryExpression: return "UnaryExpression";
    case NodeKind::ForStatement: return "ForStatement";
    case NodeKind::WhileStatement: return "WhileStatement";
    case NodeKind::TryStatement: return "TryStatement";
    case NodeKind::SpreadElement: return "SpreadElement";
    case NodeKind::AwaitExpression: return "AwaitExpression";
    case NodeKind::ExpressionStatement: return "ExpressionStatement";
    case NodeKind::EmptyStatement: return "EmptyStatement";
    case NodeKind::ForInStatement: return "ForInStatement";
    case NodeKind::DoWhileStatement: return "DoWhileStatement";
    case NodeKind::CatchClause: return "CatchClause";
    case NodeKind::ThrowStatement: return "ThrowStatement";
    case NodeKind::BreakStatement: return "BreakStatement";
    case NodeKind::ContinueStatement: return "ContinueStatement";
    case NodeKind::SwitchStatement: return "SwitchStatement";
    case NodeKind::SwitchCase: return "SwitchCase";
    case NodeKind::SequenceExpression: return "SequenceExpression";
    case NodeKind::ObjectPattern: return "ObjectPattern";
    case NodeKind::ArrayPattern: return "ArrayPattern";
    case NodeKind::AssignmentPattern: return "AssignmentPattern";
    case NodeKind::Elision: return "Elision";
  }
  return "Unknown";
}

bool structurally_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.name != b.name || a.flags != b.flags ||
      a.literal_type != b.literal_type || a.children.size() != b.children.size()) {
    return false;
  }
  switch (a.literal_type) {
    case LiteralType::String:
      if (a.string_value != b.string_value) return false;
      break;
    case LiteralType::Number:
      if (a.number_value != b.number_value) return false;
      break;
    case LiteralType::Boolean:
      if (a.bool_value != b.bool_value) return false;
      break;
    case LiteralType::Regex:
      if (a.raw != b.raw) return false;
      break;
    default:
      break;
  }
  for (size_t i = 0; i < a.children.size(); ++i) {
    if (!structurally_equal(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

int fold_constant_concat(Node& node) {
  int folds = 0;
  for (auto& child : node.children) folds += fold_constant_concat(*child);
  if (node.kind == NodeKind::BinaryExpression && node.name == "+" &&
      node.children[0]->is_string_literal() && node.children[1]->is_string_literal()) {
    std::string value = node.children[0]->string_value + node.children[1]->string_value;
    node.kind = NodeKind::Literal;
    node.name.clear();
    node.literal_type = LiteralType::String;
    node.string_value = std::move(value);
    node.raw = quote_string(node.string_value);
    node.children.clear();
    ++folds;
  }
  return folds;
}

std::unique_ptr<Node> clone(const Node& node) {
  auto copy = std::make_unique<Node>();
  copy->kind = node.kind;
  copy->span = node.span;
  copy->id = node.id;
  copy->flags = node.flags;
  copy->name = node.name;
  copy->literal_type = node.literal_type;
  copy->raw = node.raw;
  copy->string_value = node.string_value;
  copy->number_value = node.number_value;
  copy->bool_value = node.bool_value;
  for (const auto& child : node.children) {
    copy->children.push_back(clone(*child));
    copy->children.back()->parent = copy.get();
  }
  return copy;
}

namespace {

nlohmann::json node_json(const Node& node) {
  nlohmann::json j;
  j["id"] = node.id;
  j["kind"] = kind_name(node.kind);
  if (!node.name.empty()) j["name"] = node.name;
  if (node.flags != 0) j["flags"] = node.flags;
  if (node.kind == NodeKind::Literal) {
    j["raw"] = node.raw;
    switch (node.literal_type) {
      case LiteralType::String: j["value"] = node.string_value; break;
      case LiteralType::Number: j["value"] = node.number_value; break;
      case LiteralType::Boolean: j["value"] = node.bool_value; break;
      case LiteralType::Null: j["value"] = nullptr; break;
      case LiteralType::Regex: j["value"] = node.raw; break;
      case LiteralType::None: break;
    }
  }
  j["span"] = {node.span.start_line, node.span.start_col, node.span.end_line, node.span.end_col};
  auto children = nlohmann::json::array();
  for (const auto& child : node.children) children.push_back(node_json(*child));
  j["children"] = std::move(children);
  return j;
}

}  // namespace

nlohmann::json to_json(const Ast& ast) {
  nlohmann::json j;
  j["file"] = ast.file_path();
  j["program"] = node_json(ast.program());
  auto comments = nlohmann::json::array();
  for (const auto& c : ast.comments()) {
    comments.push_back({{"span", {c.span.start_line, c.span.start_col, c.span.end_line,
                                  c.span.end_col}},
                        {"text", c.text}});
  }
  j["comments"] = std::move(comments);
  return j;
}

}  // namespace wscan::js
