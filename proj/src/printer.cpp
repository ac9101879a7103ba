#include <cstdio>
#include <string>

#include "lexer.hpp"
#include "wscan/ast.hpp"

namespace wscan::js {

namespace {

constexpr int kIndent = 4;

// Higher binds tighter. Mirrors the parser's precedence table.
enum Prec : int {
  kPrecSequence = 0,
  kPrecAssign = 1,
  kPrecConditional = 2,
  kPrecCoalesce = 3,
  kPrecOr = 4,
  kPrecAnd = 5,
  kPrecBitOr = 6,
  kPrecBitXor = 7,
  kPrecBitAnd = 8,
  kPrecEquality = 9,
  kPrecRelational = 10,
  kPrecShift = 11,
  kPrecAdditive = 12,
  kPrecMultiplicative = 13,
  kPrecExponent = 14,
  kPrecUnary = 15,
  kPrecPostfix = 16,
  kPrecNew = 17,
  kPrecCall = 18,
  kPrecPrimary = 19,
};

int binary_prec(const std::string& op) {
  if (op == "??") return kPrecCoalesce;
  if (op == "||") return kPrecOr;
  if (op == "&&") return kPrecAnd;
  if (op == "|") return kPrecBitOr;
  if (op == "^") return kPrecBitXor;
  if (op == "&") return kPrecBitAnd;
  if (op == "==" || op == "!=" || op == "===" || op == "!==") return kPrecEquality;
  if (op == "<" || op == ">" || op == "<=" || op == ">=" || op == "in" || op == "instanceof") {
    return kPrecRelational;
  }
  if (op == "<<" || op == ">>" || op == ">>>") return kPrecShift;
  if (op == "+" || op == "-") return kPrecAdditive;
  if (op == "**") return kPrecExponent;
  return kPrecMultiplicative;
}

int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::SequenceExpression: return kPrecSequence;
    case NodeKind::AssignmentExpression:
    case NodeKind::AssignmentPattern:
    case NodeKind::ArrowFunction:
      return kPrecAssign;
    case NodeKind::ConditionalExpression: return kPrecConditional;
    case NodeKind::BinaryExpression: return binary_prec(n.name);
    case NodeKind::UnaryExpression: return n.has(kPrefix) ? kPrecUnary : kPrecPostfix;
    case NodeKind::AwaitExpression: return kPrecUnary;
    case NodeKind::NewExpression: return kPrecNew;
    case NodeKind::CallExpression:
    case NodeKind::MemberExpression:
      return kPrecCall;
    default:
      return kPrecPrimary;
  }
}

bool contains_optional_chain(const Node& n) {
  const Node* cur = &n;
  while (cur->kind == NodeKind::MemberExpression || cur->kind == NodeKind::CallExpression) {
    if (cur->has(kOptional)) return true;
    cur = cur->children[0].get();
  }
  return false;
}

bool contains_call(const Node& n) {
  const Node* cur = &n;
  while (true) {
    if (cur->kind == NodeKind::CallExpression) return true;
    if (cur->kind != NodeKind::MemberExpression) return false;
    cur = cur->children[0].get();
  }
}

class Printer {
 public:
  std::string take() { return std::move(out_); }

  void program(const Node& n) {
    for (const auto& stmt : n.children) statement(*stmt);
  }

  void statement(const Node& n) {
    switch (n.kind) {
      case NodeKind::ExpressionStatement: {
        line_start();
        const Node& expr = *n.children[0];
        if (starts_ambiguously(expr)) {
          out_ += '(';
          expression(expr, kPrecSequence);
          out_ += ')';
        } else {
          expression(expr, kPrecSequence);
        }
        out_ += ";\n";
        return;
      }
      case NodeKind::EmptyStatement:
        line_start();
        out_ += ";\n";
        return;
      case NodeKind::BlockStatement:
        line_start();
        block(n);
        out_ += '\n';
        return;
      case NodeKind::VariableDeclaration:
        line_start();
        declaration(n, false);
        out_ += ";\n";
        return;
      case NodeKind::FunctionDeclaration:
        line_start();
        function(n);
        out_ += '\n';
        return;
      case NodeKind::ReturnStatement:
      case NodeKind::ThrowStatement:
        line_start();
        out_ += n.kind == NodeKind::ReturnStatement ? "return" : "throw";
        if (!n.children.empty()) {
          out_ += ' ';
          expression(*n.children[0], kPrecSequence);
        }
        out_ += ";\n";
        return;
      case NodeKind::BreakStatement:
        line_start();
        out_ += "break;\n";
        return;
      case NodeKind::ContinueStatement:
        line_start();
        out_ += "continue;\n";
        return;
      case NodeKind::IfStatement:
        line_start();
        if_chain(n);
        return;
      case NodeKind::ForStatement: {
        line_start();
        out_ += "for (";
        const Node& init = *n.children[0];
        if (init.kind == NodeKind::VariableDeclaration) {
          declaration(init, true);
        } else if (init.kind != NodeKind::EmptyStatement) {
          no_in_expression(init);
        }
        out_ += ';';
        if (n.children[1]->kind != NodeKind::EmptyStatement) {
          out_ += ' ';
          expression(*n.children[1], kPrecSequence);
        }
        out_ += ';';
        if (n.children[2]->kind != NodeKind::EmptyStatement) {
          out_ += ' ';
          expression(*n.children[2], kPrecSequence);
        }
        out_ += ')';
        body(*n.children[3]);
        return;
      }
      case NodeKind::ForInStatement: {
        line_start();
        out_ += "for (";
        const Node& left = *n.children[0];
        if (left.kind == NodeKind::VariableDeclaration) {
          declaration(left, true);
        } else {
          expression(left, kPrecCall);
        }
        out_ += ' ' + n.name + ' ';
        expression(*n.children[1], n.name == "of" ? kPrecAssign : kPrecSequence);
        out_ += ')';
        body(*n.children[2]);
        return;
      }
      case NodeKind::WhileStatement:
        line_start();
        out_ += "while (";
        expression(*n.children[0], kPrecSequence);
        out_ += ')';
        body(*n.children[1]);
        return;
      case NodeKind::DoWhileStatement:
        line_start();
        out_ += "do";
        if (n.children[0]->kind == NodeKind::BlockStatement) {
          out_ += ' ';
          block(*n.children[0]);
          out_ += ' ';
        } else {
          out_ += '\n';
          ++depth_;
          statement(*n.children[0]);
          --depth_;
          line_start();
        }
        out_ += "while (";
        expression(*n.children[1], kPrecSequence);
        out_ += ");\n";
        return;
      case NodeKind::TryStatement: {
        line_start();
        out_ += "try ";
        block(*n.children[0]);
        for (size_t i = 1; i < n.children.size(); ++i) {
          const Node& part = *n.children[i];
          if (part.kind == NodeKind::CatchClause) {
            out_ += " catch ";
            if (part.children.size() == 2) {
              out_ += '(';
              expression(*part.children[0], kPrecAssign);
              out_ += ") ";
            }
            block(*part.children.back());
          } else {
            out_ += " finally ";
            block(part);
          }
        }
        out_ += '\n';
        return;
      }
      case NodeKind::SwitchStatement: {
        line_start();
        out_ += "switch (";
        expression(*n.children[0], kPrecSequence);
        out_ += ") {\n";
        ++depth_;
        for (size_t i = 1; i < n.children.size(); ++i) {
          const Node& clause = *n.children[i];
          line_start();
          size_t first_stmt = 0;
          if (clause.name == "case") {
            out_ += "case ";
            expression(*clause.children[0], kPrecSequence);
            first_stmt = 1;
          } else {
            out_ += "default";
          }
          out_ += ":\n";
          ++depth_;
          for (size_t k = first_stmt; k < clause.children.size(); ++k) statement(*clause.children[k]);
          --depth_;
        }
        --depth_;
        line_start();
        out_ += "}\n";
        return;
      }
      default:
        // Expression nodes appearing directly in statement position.
        line_start();
        expression(n, kPrecSequence);
        out_ += ";\n";
        return;
    }
  }

  void expression(const Node& n, int min_prec) {
    bool parens = precedence(n) < min_prec;
    if (parens) out_ += '(';
    expression_inner(n);
    if (parens) out_ += ')';
  }

 private:
  void line_start() { out_.append(size_t(depth_ * kIndent), ' '); }

  static bool starts_ambiguously(const Node& expr) {
    const Node* cur = &expr;
    while (true) {
      switch (cur->kind) {
        case NodeKind::ObjectLiteral:
        case NodeKind::ObjectPattern:
        case NodeKind::FunctionExpression:
          return true;
        case NodeKind::CallExpression:
        case NodeKind::MemberExpression:
        case NodeKind::BinaryExpression:
        case NodeKind::AssignmentExpression:
        case NodeKind::ConditionalExpression:
        case NodeKind::SequenceExpression:
          cur = cur->children[0].get();
          continue;
        case NodeKind::UnaryExpression:
          if (cur->has(kPrefix)) return false;
          cur = cur->children[0].get();
          continue;
        default:
          return false;
      }
    }
  }

  void block(const Node& n) {
    if (n.children.empty()) {
      out_ += "{}";
      return;
    }
    out_ += "{\n";
    ++depth_;
    for (const auto& stmt : n.children) statement(*stmt);
    --depth_;
    line_start();
    out_ += '}';
  }

  void body(const Node& n) {
    if (n.kind == NodeKind::BlockStatement) {
      out_ += ' ';
      block(n);
      out_ += '\n';
      return;
    }
    out_ += '\n';
    ++depth_;
    statement(n);
    --depth_;
  }

  void if_chain(const Node& n) {
    out_ += "if (";
    expression(*n.children[0], kPrecSequence);
    out_ += ')';
    const Node& consequent = *n.children[1];
    if (n.children.size() < 3) {
      body(consequent);
      return;
    }
    if (consequent.kind == NodeKind::BlockStatement) {
      out_ += ' ';
      block(consequent);
      out_ += " else";
    } else {
      out_ += '\n';
      ++depth_;
      statement(consequent);
      --depth_;
      line_start();
      out_ += "else";
    }
    const Node& alternate = *n.children[2];
    if (alternate.kind == NodeKind::IfStatement) {
      out_ += ' ';
      if_chain(alternate);
    } else {
      body(alternate);
    }
  }

  void declaration(const Node& n, bool no_in) {
    out_ += n.name;
    out_ += ' ';
    for (size_t i = 0; i < n.children.size(); ++i) {
      if (i) out_ += ", ";
      const Node& d = *n.children[i];
      expression(*d.children[0], kPrecAssign);
      if (d.children.size() > 1) {
        out_ += " = ";
        if (no_in) {
          no_in_expression(*d.children[1], kPrecAssign);
        } else {
          expression(*d.children[1], kPrecAssign);
        }
      }
    }
  }

  // Expressions in a for-init must not expose a top-level `in`.
  static bool has_bare_in(const Node& n) {
    if (n.kind == NodeKind::BinaryExpression && n.name == "in") return true;
    if (n.is_function() || n.kind == NodeKind::CallExpression ||
        n.kind == NodeKind::ArrayLiteral || n.kind == NodeKind::ObjectLiteral ||
        n.kind == NodeKind::TemplateLiteral) {
      return false;
    }
    for (const auto& c : n.children) {
      if (has_bare_in(*c)) return true;
    }
    return false;
  }

  void no_in_expression(const Node& n, int min_prec = kPrecSequence) {
    if (has_bare_in(n)) {
      out_ += '(';
      expression(n, kPrecSequence);
      out_ += ')';
    } else {
      expression(n, min_prec);
    }
  }

  void params(const Node& fn) {
    out_ += '(';
    for (size_t i = 0; i < fn.param_count(); ++i) {
      if (i) out_ += ", ";
      expression(*fn.children[i], kPrecAssign);
    }
    out_ += ')';
  }

  void function(const Node& n) {
    if (n.has(kAsync)) out_ += "async ";
    out_ += "function";
    if (!n.name.empty()) {
      out_ += ' ';
      out_ += n.name;
    }
    params(n);
    out_ += ' ';
    block(*n.function_body());
  }

  void arrow(const Node& n) {
    if (n.has(kAsync)) out_ += "async ";
    params(n);
    out_ += " => ";
    const Node& b = *n.function_body();
    if (n.has(kExpressionBody)) {
      if (b.kind == NodeKind::ObjectLiteral || b.kind == NodeKind::SequenceExpression) {
        out_ += '(';
        expression(b, kPrecSequence);
        out_ += ')';
      } else {
        expression(b, kPrecAssign);
      }
    } else {
      block(b);
    }
  }

  void literal(const Node& n) {
    switch (n.literal_type) {
      case LiteralType::String:
        out_ += quote_string(n.string_value);
        return;
      case LiteralType::Number:
      case LiteralType::Regex:
        out_ += n.raw;
        return;
      case LiteralType::Boolean:
        out_ += n.bool_value ? "true" : "false";
        return;
      case LiteralType::Null:
        out_ += "null";
        return;
      case LiteralType::None:
        return;
    }
  }

  void template_literal(const Node& n) {
    out_ += '`';
    for (size_t i = 0; i < n.children.size(); ++i) {
      if (i % 2 == 0) {
        out_ += n.children[i]->raw;
      } else {
        out_ += "${";
        expression(*n.children[i], kPrecSequence);
        out_ += '}';
      }
    }
    out_ += '`';
  }

  void property_key(const Node& prop) {
    const Node& key = *prop.children[0];
    if (prop.has(kComputed)) {
      out_ += '[';
      expression(key, kPrecAssign);
      out_ += ']';
    } else if (key.kind == NodeKind::Identifier) {
      out_ += key.name;
    } else {
      literal(key);
    }
  }

  void object(const Node& n) {
    if (n.children.empty()) {
      out_ += "{}";
      return;
    }
    bool pattern = n.kind == NodeKind::ObjectPattern;
    if (pattern) {
      out_ += "{";
    } else {
      out_ += "{\n";
      ++depth_;
    }
    for (size_t i = 0; i < n.children.size(); ++i) {
      const Node& item = *n.children[i];
      if (pattern) {
        out_ += i ? ", " : "";
      } else {
        line_start();
      }
      if (item.kind == NodeKind::SpreadElement) {
        out_ += "...";
        expression(*item.children[0], kPrecAssign);
      } else if (item.has(kShorthand)) {
        expression(*item.children[1], kPrecAssign);
      } else if (item.has(kMethod)) {
        const Node& fn = *item.children[1];
        if (fn.has(kAsync)) out_ += "async ";
        property_key(item);
        params(fn);
        out_ += ' ';
        block(*fn.function_body());
      } else {
        property_key(item);
        out_ += ": ";
        expression(*item.children[1], kPrecAssign);
      }
      if (!pattern) {
        if (i + 1 < n.children.size()) out_ += ',';
        out_ += '\n';
      }
    }
    if (pattern) {
      out_ += '}';
    } else {
      --depth_;
      line_start();
      out_ += '}';
    }
  }

  void array(const Node& n) {
    out_ += '[';
    for (size_t i = 0; i < n.children.size(); ++i) {
      const Node& item = *n.children[i];
      if (i) out_ += item.kind == NodeKind::Elision ? "," : ", ";
      if (item.kind == NodeKind::Elision) {
        if (i + 1 == n.children.size()) out_ += ',';
        continue;
      }
      if (item.kind == NodeKind::SpreadElement) {
        out_ += "...";
        expression(*item.children[0], kPrecAssign);
      } else {
        expression(item, kPrecAssign);
      }
    }
    out_ += ']';
  }

  void arguments(const Node& call) {
    out_ += '(';
    for (size_t i = 1; i < call.children.size(); ++i) {
      if (i > 1) out_ += ", ";
      const Node& arg = *call.children[i];
      if (arg.kind == NodeKind::SpreadElement) {
        out_ += "...";
        expression(*arg.children[0], kPrecAssign);
      } else {
        expression(arg, kPrecAssign);
      }
    }
    out_ += ')';
  }

  void expression_inner(const Node& n) {
    switch (n.kind) {
      case NodeKind::Identifier:
        out_ += n.name;
        return;
      case NodeKind::ThisExpression:
        out_ += "this";
        return;
      case NodeKind::Literal:
        literal(n);
        return;
      case NodeKind::TemplateLiteral:
        template_literal(n);
        return;
      case NodeKind::ObjectLiteral:
      case NodeKind::ObjectPattern:
        object(n);
        return;
      case NodeKind::ArrayLiteral:
      case NodeKind::ArrayPattern:
        array(n);
        return;
      case NodeKind::FunctionExpression:
      case NodeKind::FunctionDeclaration:
        function(n);
        return;
      case NodeKind::ArrowFunction:
        arrow(n);
        return;
      case NodeKind::SequenceExpression:
        for (size_t i = 0; i < n.children.size(); ++i) {
          if (i) out_ += ", ";
          expression(*n.children[i], kPrecAssign);
        }
        return;
      case NodeKind::AssignmentExpression:
        expression(*n.children[0], kPrecCall);
        out_ += ' ' + n.name + ' ';
        expression(*n.children[1], kPrecAssign);
        return;
      case NodeKind::AssignmentPattern:
        expression(*n.children[0], kPrecCall);
        out_ += " = ";
        expression(*n.children[1], kPrecAssign);
        return;
      case NodeKind::ConditionalExpression:
        expression(*n.children[0], kPrecCoalesce);
        out_ += " ? ";
        expression(*n.children[1], kPrecAssign);
        out_ += " : ";
        expression(*n.children[2], kPrecAssign);
        return;
      case NodeKind::BinaryExpression: {
        int p = binary_prec(n.name);
        const Node& left = *n.children[0];
        const Node& right = *n.children[1];
        // `??` cannot mix with || and && without parentheses.
        auto mixes = [&](const Node& side) {
          if (side.kind != NodeKind::BinaryExpression) return false;
          bool side_logical = side.name == "||" || side.name == "&&";
          bool side_coalesce = side.name == "??";
          return (n.name == "??" && side_logical) ||
                 ((n.name == "||" || n.name == "&&") && side_coalesce);
        };
        bool right_assoc = n.name == "**";
        int left_min = right_assoc ? p + 1 : p;
        if (right_assoc && left.kind == NodeKind::UnaryExpression && left.has(kPrefix)) {
          left_min = kPrecPrimary;
        }
        if (right_assoc && left.kind == NodeKind::AwaitExpression) left_min = kPrecPrimary;
        if (mixes(left)) {
          out_ += '(';
          expression(left, kPrecSequence);
          out_ += ')';
        } else {
          expression(left, left_min);
        }
        out_ += ' ' + n.name + ' ';
        if (mixes(right)) {
          out_ += '(';
          expression(right, kPrecSequence);
          out_ += ')';
        } else {
          expression(right, right_assoc ? p : p + 1);
        }
        return;
      }
      case NodeKind::UnaryExpression: {
        const Node& arg = *n.children[0];
        if (!n.has(kPrefix)) {
          expression(arg, kPrecCall);
          out_ += n.name;
          return;
        }
        out_ += n.name;
        bool word = n.name == "typeof" || n.name == "void" || n.name == "delete";
        bool nested_sign = arg.kind == NodeKind::UnaryExpression && arg.has(kPrefix) &&
                           ((n.name[0] == '+' && arg.name[0] == '+') ||
                            (n.name[0] == '-' && arg.name[0] == '-'));
        bool negative_literal = (n.name == "-" || n.name == "+") && arg.kind == NodeKind::Literal &&
                                !arg.raw.empty() && arg.raw[0] == '-';
        if (word || nested_sign || negative_literal) out_ += ' ';
        expression(arg, kPrecUnary);
        return;
      }
      case NodeKind::AwaitExpression:
        out_ += "await ";
        expression(*n.children[0], kPrecUnary);
        return;
      case NodeKind::SpreadElement:
        out_ += "...";
        expression(*n.children[0], kPrecAssign);
        return;
      case NodeKind::MemberExpression: {
        const Node& object = *n.children[0];
        bool wrap = precedence(object) < kPrecCall ||
                    (object.kind == NodeKind::Literal && object.literal_type == LiteralType::Number &&
                     object.raw.find_first_of(".eExXoObB") == std::string::npos && !n.has(kComputed));
        // `new a().b` vs `new (a.b)` is handled by the NewExpression printer.
        if (wrap) out_ += '(';
        expression(object, wrap ? kPrecSequence : kPrecCall);
        if (wrap) out_ += ')';
        if (n.has(kOptional)) out_ += "?.";
        if (n.has(kComputed)) {
          out_ += '[';
          expression(*n.children[1], kPrecSequence);
          out_ += ']';
        } else {
          if (!n.has(kOptional)) out_ += '.';
          out_ += n.children[1]->name;
        }
        return;
      }
      case NodeKind::CallExpression: {
        const Node& callee = *n.children[0];
        bool wrap = precedence(callee) < kPrecCall;
        if (wrap) out_ += '(';
        expression(callee, wrap ? kPrecSequence : kPrecCall);
        if (wrap) out_ += ')';
        if (n.has(kOptional)) out_ += "?.";
        arguments(n);
        return;
      }
      case NodeKind::NewExpression: {
        const Node& callee = *n.children[0];
        out_ += "new ";
        bool wrap = precedence(callee) < kPrecNew || contains_call(callee) ||
                    contains_optional_chain(callee);
        if (wrap) out_ += '(';
        expression(callee, wrap ? kPrecSequence : kPrecNew);
        if (wrap) out_ += ')';
        arguments(n);
        return;
      }
      default:
        return;
    }
  }

  std::string out_;
  int depth_ = 0;
};

}  // namespace

std::string quote_string(std::string_view value) {
  std::string out = "\"";
  for (size_t i = 0; i < value.size(); ++i) {
    unsigned char c = value[i];
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\v': out += "\\v"; break;
      default:
        if (c < 0x20 || c == 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\x%02x", c);
          out += buf;
        } else if (c == 0xe2 && i + 2 < value.size() && uint8_t(value[i + 1]) == 0x80 &&
                   (uint8_t(value[i + 2]) == 0xa8 || uint8_t(value[i + 2]) == 0xa9)) {
          // U+2028 / U+2029 are line terminators inside string literals.
          out += uint8_t(value[i + 2]) == 0xa8 ? "\\u2028" : "\\u2029";
          i += 2;
        } else {
          out.push_back(char(c));
        }
    }
  }
  out += '"';
  return out;
}

std::string print_canonical(const Ast& ast) {
  Printer p;
  p.program(ast.program());
  std::string out = p.take();
  if (out.empty()) out = "\n";
  return out;
}

std::string print_node(const Node& node) {
  Printer p;
  if (node.kind == NodeKind::Program) {
    p.program(node);
  } else {
    p.statement(node);
  }
  return p.take();
}

std::string print_expression(const Node& node) {
  Printer p;
  p.expression(node, kPrecSequence);
  return p.take();
}

}  // namespace wscan::js
