#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

// ECMAScript-subset syntax tree.
//
// Child layout per kind (positional, fixed):
//   Program, BlockStatement        statements...
//   ExpressionStatement            [expression]
//   VariableDeclaration            declarators...          name = var|let|const
//   VariableDeclarator             [target, init?]
//   FunctionDeclaration,
//   FunctionExpression,
//   ArrowFunction                  [params..., body]       name = function name ("" if anonymous)
//   ReturnStatement, ThrowStatement [argument?]
//   IfStatement                    [test, consequent, alternate?]
//   ForStatement                   [init, test, update, body]  (absent parts are EmptyStatement)
//   ForInStatement                 [left, right, body]     name = in|of
//   WhileStatement                 [test, body]
//   DoWhileStatement               [body, test]
//   TryStatement                   [block, CatchClause?, BlockStatement finalizer?]
//   CatchClause                    [param?, body]
//   SwitchStatement                [discriminant, SwitchCase...]
//   SwitchCase                     [test, statements...] or [statements...] when name = default
//   AssignmentExpression           [target, value]         name = operator
//   BinaryExpression               [left, right]           name = operator (logical ops included)
//   UnaryExpression                [argument]              name = operator; kPrefix for prefix forms
//   ConditionalExpression          [test, consequent, alternate]
//   CallExpression, NewExpression  [callee, arguments...]
//   MemberExpression               [object, property]      kComputed for a[b]
//   SequenceExpression             expressions...
//   TemplateLiteral                [quasi, expr, quasi, ..., quasi]  quasis are string Literals
//   ObjectLiteral, ObjectPattern   Property | SpreadElement ...
//   Property                       [key, value]            name = static key text
//   ArrayLiteral, ArrayPattern     elements... (Elision for holes)
//   AssignmentPattern              [target, default]
//   SpreadElement, AwaitExpression [argument]
namespace wscan::js {

enum class NodeKind : uint8_t {
  Program,
  FunctionDeclaration,
  FunctionExpression,
  ArrowFunction,
  VariableDeclaration,
  VariableDeclarator,
  AssignmentExpression,
  CallExpression,
  MemberExpression,
  Identifier,
  Literal,
  ObjectLiteral,
  Property,
  ReturnStatement,
  IfStatement,
  BlockStatement,
  BinaryExpression,
  TemplateLiteral,
  NewExpression,
  ThisExpression,
  ArrayLiteral,
  ConditionalExpression,
  UnaryExpression,
  ForStatement,
  WhileStatement,
  TryStatement,
  SpreadElement,
  AwaitExpression,
  // Extensions beyond the core inventory, needed by real bundle code.
  ExpressionStatement,
  EmptyStatement,
  ForInStatement,
  DoWhileStatement,
  CatchClause,
  ThrowStatement,
  BreakStatement,
  ContinueStatement,
  SwitchStatement,
  SwitchCase,
  SequenceExpression,
  ObjectPattern,
  ArrayPattern,
  AssignmentPattern,
  Elision,
};

std::string_view kind_name(NodeKind kind);

enum class LiteralType : uint8_t { None, String, Number, Boolean, Null, Regex };

enum NodeFlag : uint32_t {
  kComputed = 1u << 0,
  kOptional = 1u << 1,
  kPrefix = 1u << 2,
  kAsync = 1u << 3,
  kShorthand = 1u << 4,
  kMethod = 1u << 5,
  kExpressionBody = 1u << 6,
};

struct Span {
  int start_line = 1;
  int start_col = 1;
  int end_line = 1;
  int end_col = 1;
  uint32_t begin = 0;  // byte offsets, end exclusive
  uint32_t end = 0;

  bool contains(const Span& other) const { return begin <= other.begin && other.end <= end; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Node {
  NodeKind kind = NodeKind::EmptyStatement;
  Span span;
  int id = -1;
  uint32_t flags = 0;
  std::string name;

  LiteralType literal_type = LiteralType::None;
  std::string raw;           // source text of literals (numbers keep `5e3`)
  std::string string_value;  // cooked value of string literals and template quasis
  double number_value = 0;
  bool bool_value = false;

  std::vector<std::unique_ptr<Node>> children;
  Node* parent = nullptr;

  bool has(NodeFlag flag) const { return (flags & flag) != 0; }
  bool is_function() const {
    return kind == NodeKind::FunctionDeclaration || kind == NodeKind::FunctionExpression ||
           kind == NodeKind::ArrowFunction;
  }
  bool is_string_literal() const {
    return kind == NodeKind::Literal && literal_type == LiteralType::String;
  }
  const Node* child(size_t i) const { return i < children.size() ? children[i].get() : nullptr; }
  // Function helpers: parameters are every child except the last.
  size_t param_count() const { return is_function() ? children.size() - 1 : 0; }
  const Node* function_body() const { return is_function() ? children.back().get() : nullptr; }
};

struct Comment {
  Span span;
  std::string text;
};

// A parsed script. Immutable once built; node ids are dense and pre-order.
class Ast {
 public:
  Ast() = default;
  Ast(std::string file_path, std::unique_ptr<Node> program, std::vector<Comment> comments);
  Ast(Ast&&) noexcept = default;
  Ast& operator=(Ast&&) noexcept = default;

  const std::string& file_path() const { return file_path_; }
  const Node& program() const { return *program_; }
  const std::vector<Comment>& comments() const { return comments_; }
  const Node* node(int id) const;
  size_t size() const { return by_id_.size(); }

  // Mutable access for tree rewriters; call renumber() after editing.
  Node& mutable_program() { return *program_; }
  void renumber();

 private:
  std::string file_path_;
  std::unique_ptr<Node> program_;
  std::vector<Comment> comments_;
  std::vector<const Node*> by_id_;
};

Ast parse_script(std::string_view source, std::string file_path = {});

enum class WalkOrder { Pre, Post };
std::vector<const Node*> walk(const Ast& ast, WalkOrder order = WalkOrder::Pre);

template <typename Fn>
void visit_pre(const Node& node, Fn&& fn) {
  fn(node);
  for (const auto& c : node.children) visit_pre(*c, fn);
}

// Dotted path of a static member chain rooted at an Identifier or `this`.
std::optional<std::string> member_path(const Node& node);

std::string print_canonical(const Ast& ast);
std::string print_expression(const Node& node);
std::string print_node(const Node& node);

// Structural equality: kinds, names, flags, literal values and children; spans ignored.
bool structurally_equal(const Node& a, const Node& b);

// Replaces every `"a" + "b"` subtree (both operands string literals) with the folded literal.
// Returns the number of folds performed.
int fold_constant_concat(Node& node);

std::unique_ptr<Node> clone(const Node& node);

nlohmann::json to_json(const Ast& ast);

// Quoted, escaped JS string literal with double quotes.
std::string quote_string(std::string_view value);

}  // namespace wscan::js
