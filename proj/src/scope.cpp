#include "wscan/scope.hpp"

namespace wscan::js {

class ScopeBuilder {
 public:
  ScopeBuilder(const Ast& ast, ScopeInfo& info) : ast_(ast), info_(info) {
    info_.node_scope_.assign(ast.size(), 0);
  }

  void run() {
    const Node& program = ast_.program();
    int global = new_scope(program, -1, true);
    declare_pass(program, global);
    resolve_pass(program);
  }

 private:
  int new_scope(const Node& node, int parent, bool function_scope) {
    Scope s;
    s.index = int(info_.scopes_.size());
    s.node = node.id;
    s.parent = parent;
    s.function_scope = function_scope;
    info_.scopes_.push_back(s);
    return s.index;
  }

  int function_scope_of(int scope) const {
    while (!info_.scopes_[size_t(scope)].function_scope) scope = info_.scopes_[size_t(scope)].parent;
    return scope;
  }

  int declare(const std::string& name, BindingKind kind, int decl, int scope) {
    auto& names = info_.scopes_[size_t(scope)].bindings;
    auto it = names.find(name);
    if (it != names.end()) {
      // Redeclaration (`var x; var x;` or a function over a var): one binding.
      return it->second;
    }
    Binding b;
    b.index = int(info_.bindings_.size());
    b.name = name;
    b.kind = kind;
    b.decl = decl;
    b.scope = scope;
    info_.bindings_.push_back(b);
    names[name] = b.index;
    return b.index;
  }

  // Declares every identifier in a binding pattern; `value` is the expression the whole
  // pattern receives (or -1).
  void declare_pattern(const Node& pattern, BindingKind kind, int scope, int value, int site,
                       bool init, int function_id) {
    switch (pattern.kind) {
      case NodeKind::Identifier: {
        int b = declare(pattern.name, kind, pattern.id, scope);
        info_.decl_binding_[pattern.id] = b;
        Binding& binding = info_.bindings_[size_t(b)];
        if (function_id >= 0) binding.function = function_id;
        if (value >= 0) binding.writes.push_back({value, site, init});
        return;
      }
      case NodeKind::ObjectPattern:
      case NodeKind::ObjectLiteral:
        for (const auto& prop : pattern.children) {
          if (prop->kind == NodeKind::SpreadElement) {
            declare_pattern(*prop->children[0], kind, scope, value, site, init, function_id);
          } else if (prop->kind == NodeKind::Property) {
            if (prop->has(kComputed)) declare_pass(*prop->children[0], scope);
            declare_pattern(*prop->children[1], kind, scope, value, site, init, function_id);
          }
        }
        return;
      case NodeKind::ArrayPattern:
      case NodeKind::ArrayLiteral:
        for (const auto& el : pattern.children) {
          if (el->kind == NodeKind::Elision) continue;
          const Node& target = el->kind == NodeKind::SpreadElement ? *el->children[0] : *el;
          declare_pattern(target, kind, scope, value, site, init, function_id);
        }
        return;
      case NodeKind::AssignmentPattern:
        declare_pass(*pattern.children[1], scope);
        declare_pattern(*pattern.children[0], kind, scope, value, site, init, function_id);
        // The default value is a second possible source.
        add_pattern_write(*pattern.children[0], pattern.children[1]->id, pattern.id, init);
        return;
      case NodeKind::SpreadElement:
        declare_pattern(*pattern.children[0], kind, scope, value, site, init, function_id);
        return;
      default:
        // Member targets etc. inside assignment patterns are not declarations.
        declare_pass(pattern, scope);
        return;
    }
  }

  void add_pattern_write(const Node& target, int value, int site, bool init) {
    if (target.kind == NodeKind::Identifier) {
      auto it = info_.decl_binding_.find(target.id);
      if (it != info_.decl_binding_.end()) {
        info_.bindings_[size_t(it->second)].writes.push_back({value, site, init});
      }
    }
  }

  void mark(const Node& node, int scope) { info_.node_scope_[size_t(node.id)] = scope; }

  void declare_function(const Node& fn, int scope) {
    mark(fn, scope);
    int inner = new_scope(fn, scope, true);
    if (fn.kind == NodeKind::FunctionDeclaration && !fn.name.empty()) {
      int b = declare(fn.name, BindingKind::Function, fn.id, scope);
      info_.bindings_[size_t(b)].function = fn.id;
    } else if (fn.kind == NodeKind::FunctionExpression && !fn.name.empty()) {
      int b = declare(fn.name, BindingKind::Function, fn.id, inner);
      info_.bindings_[size_t(b)].function = fn.id;
    }
    for (size_t i = 0; i < fn.param_count(); ++i) {
      mark_subtree_scope(*fn.children[i], inner);
      declare_pattern(*fn.children[i], BindingKind::Param, inner, -1, -1, false, fn.id);
    }
    const Node& body = *fn.function_body();
    if (body.kind == NodeKind::BlockStatement && !fn.has(kExpressionBody)) {
      mark(body, inner);
      for (const auto& stmt : body.children) declare_pass(*stmt, inner);
    } else {
      declare_pass(body, inner);
    }
  }

  void mark_subtree_scope(const Node& node, int scope) {
    mark(node, scope);
    for (const auto& c : node.children) {
      if (c->is_function()) continue;
      mark_subtree_scope(*c, scope);
    }
  }

  void declare_pass(const Node& node, int scope) {
    mark(node, scope);
    switch (node.kind) {
      case NodeKind::FunctionDeclaration:
      case NodeKind::FunctionExpression:
      case NodeKind::ArrowFunction:
        declare_function(node, scope);
        return;
      case NodeKind::BlockStatement: {
        int inner = new_scope(node, scope, false);
        mark(node, inner);
        for (const auto& c : node.children) declare_pass(*c, inner);
        return;
      }
      case NodeKind::ForStatement:
      case NodeKind::ForInStatement: {
        int inner = new_scope(node, scope, false);
        mark(node, inner);
        if (node.kind == NodeKind::ForInStatement) {
          const Node& left = *node.children[0];
          declare_pass(*node.children[1], inner);
          if (left.kind == NodeKind::VariableDeclaration) {
            mark(left, inner);
            BindingKind kind = decl_kind(left.name);
            int target = kind == BindingKind::Var ? function_scope_of(inner) : inner;
            for (const auto& d : left.children) {
              mark_subtree_scope(*d, inner);
              declare_pattern(*d->children[0], kind, target, node.children[1]->id, node.id, true, -1);
            }
          } else {
            declare_pass(left, inner);
          }
          declare_pass(*node.children[2], inner);
          return;
        }
        for (const auto& c : node.children) declare_pass(*c, inner);
        return;
      }
      case NodeKind::CatchClause: {
        int inner = new_scope(node, scope, false);
        mark(node, inner);
        if (node.children.size() == 2) {
          mark_subtree_scope(*node.children[0], inner);
          declare_pattern(*node.children[0], BindingKind::Catch, inner, -1, -1, false, -1);
        }
        const Node& body = *node.children.back();
        mark(body, inner);
        for (const auto& stmt : body.children) declare_pass(*stmt, inner);
        return;
      }
      case NodeKind::SwitchStatement: {
        declare_pass(*node.children[0], scope);
        int inner = new_scope(node, scope, false);
        for (size_t i = 1; i < node.children.size(); ++i) declare_pass(*node.children[i], inner);
        return;
      }
      case NodeKind::VariableDeclaration: {
        BindingKind kind = decl_kind(node.name);
        int target = kind == BindingKind::Var ? function_scope_of(scope) : scope;
        for (const auto& d : node.children) {
          mark(*d, scope);
          if (d->children.size() > 1) declare_pass(*d->children[1], scope);
          mark_subtree_scope(*d->children[0], scope);
          int value = d->children.size() > 1 ? d->children[1]->id : -1;
          declare_pattern(*d->children[0], kind, target, value, d->id, true, -1);
        }
        return;
      }
      default:
        for (const auto& c : node.children) declare_pass(*c, scope);
        return;
    }
  }

  static BindingKind decl_kind(const std::string& keyword) {
    if (keyword == "let") return BindingKind::Let;
    if (keyword == "const") return BindingKind::Const;
    return BindingKind::Var;
  }

  int resolve_name(const std::string& name, int scope, int ref_id) {
    if (const Binding* b = info_.lookup(scope, name)) return b->index;
    auto it = globals_.find(name);
    if (it != globals_.end()) return it->second;
    Binding b;
    b.index = int(info_.bindings_.size());
    b.name = name;
    b.kind = BindingKind::Global;
    b.decl = ref_id;
    b.scope = -1;
    info_.bindings_.push_back(b);
    globals_[name] = b.index;
    return b.index;
  }

  static bool is_reference_position(const Node& id) {
    const Node* parent = id.parent;
    if (!parent) return false;
    if (parent->kind == NodeKind::MemberExpression && !parent->has(kComputed) &&
        parent->children[1].get() == &id) {
      return false;
    }
    if (parent->kind == NodeKind::Property && !parent->has(kComputed) &&
        parent->children[0].get() == &id) {
      return false;
    }
    return true;
  }

  void assign_targets(const Node& target, int value, int site) {
    switch (target.kind) {
      case NodeKind::Identifier: {
        auto it = info_.ref_binding_.find(target.id);
        if (it != info_.ref_binding_.end()) {
          info_.bindings_[size_t(it->second)].writes.push_back({value, site, false});
        }
        return;
      }
      case NodeKind::ObjectPattern:
        for (const auto& prop : target.children) {
          const Node& t = prop->kind == NodeKind::SpreadElement ? *prop->children[0] : *prop->children[1];
          assign_targets(t, value, site);
        }
        return;
      case NodeKind::ArrayPattern:
        for (const auto& el : target.children) {
          if (el->kind == NodeKind::Elision) continue;
          assign_targets(el->kind == NodeKind::SpreadElement ? *el->children[0] : *el, value, site);
        }
        return;
      case NodeKind::AssignmentPattern:
        assign_targets(*target.children[0], value, site);
        assign_targets(*target.children[0], target.children[1]->id, target.id);
        return;
      default:
        return;
    }
  }

  void resolve_pass(const Node& node) {
    // Post-order: nested patterns are resolved before the assignment that writes them.
    for (const auto& c : node.children) resolve_pass(*c);
    for (const auto& c : node.children) {
      if (c->kind != NodeKind::Identifier) continue;
      if (info_.decl_binding_.count(c->id)) continue;
      if (!is_reference_position(*c)) continue;
      int b = resolve_name(c->name, info_.node_scope_[size_t(c->id)], c->id);
      info_.ref_binding_[c->id] = b;
      info_.bindings_[size_t(b)].refs.push_back(c->id);
    }
    if (node.kind == NodeKind::AssignmentExpression) {
      int value = node.name == "=" ? node.children[1]->id : node.id;
      assign_targets(*node.children[0], value, node.id);
    } else if (node.kind == NodeKind::UnaryExpression && (node.name == "++" || node.name == "--")) {
      assign_targets(*node.children[0], node.id, node.id);
    } else if (node.kind == NodeKind::ForInStatement &&
               node.children[0]->kind != NodeKind::VariableDeclaration) {
      assign_targets(*node.children[0], node.children[1]->id, node.id);
    }
  }

  const Ast& ast_;
  ScopeInfo& info_;
  std::map<std::string, int> globals_;
};

ScopeInfo ScopeInfo::analyze(const Ast& ast) {
  ScopeInfo info;
  ScopeBuilder(ast, info).run();
  return info;
}

const Binding* ScopeInfo::binding_of(int identifier_id) const {
  auto it = ref_binding_.find(identifier_id);
  if (it == ref_binding_.end()) it = decl_binding_.find(identifier_id);
  if (it == decl_binding_.end()) return nullptr;
  return &bindings_[size_t(it->second)];
}

int ScopeInfo::scope_of(int node_id) const {
  if (node_id < 0 || size_t(node_id) >= node_scope_.size()) return 0;
  return node_scope_[size_t(node_id)];
}

const Binding* ScopeInfo::lookup(int scope, const std::string& name) const {
  while (scope >= 0) {
    const Scope& s = scopes_[size_t(scope)];
    auto it = s.bindings.find(name);
    if (it != s.bindings.end()) return &bindings_[size_t(it->second)];
    scope = s.parent;
  }
  return nullptr;
}

bool ScopeInfo::visible_at(const Binding& b, int node_id, const Ast& ast) const {
  if (b.kind == BindingKind::Global) return true;
  int scope = scope_of(node_id);
  bool enclosing = false;
  for (int s = scope; s >= 0; s = scopes_[size_t(s)].parent) {
    if (s == b.scope) {
      enclosing = true;
      break;
    }
  }
  if (!enclosing) return false;
  // Another binding of the same name in a nearer scope shadows this one.
  const Binding* nearest = lookup(scope, b.name);
  if (nearest && nearest->index != b.index) return false;
  if (b.kind != BindingKind::Let && b.kind != BindingKind::Const) return true;
  // Lexical declarations are usable only after their declaration, unless the use sits in a
  // nested function that runs later.
  const Node* decl = ast.node(b.decl);
  const Node* at = ast.node(node_id);
  if (!decl || !at) return false;
  if (decl->span.begin <= at->span.begin) return true;
  int scope_node = scopes_[size_t(b.scope)].node;
  for (const Node* p = at; p && p->id != scope_node; p = p->parent) {
    if (p->is_function()) return true;
  }
  return false;
}

}  // namespace wscan::js
