#pragma once

#include <map>
#include <string>
#include <vector>

#include "wscan/ast.hpp"

namespace wscan::js {

enum class BindingKind { Var, Let, Const, Param, Function, Catch, Global };

struct Write {
  int value = -1;   // node id of the assigned expression, -1 when unknown
  int site = -1;    // declarator / assignment / pattern node performing the write
  bool init = false;  // true for declaration initializers
};

struct Binding {
  int index = -1;
  std::string name;
  BindingKind kind = BindingKind::Var;
  int decl = -1;   // declaring Identifier (or function node); first reference for globals
  int scope = -1;
  std::vector<int> refs;  // referencing Identifier node ids
  std::vector<Write> writes;
  int function = -1;  // for params: owning function node id; for Function: the function node
};

struct Scope {
  int index = -1;
  int node = -1;
  int parent = -1;
  bool function_scope = false;
  std::map<std::string, int> bindings;
};

class ScopeInfo {
 public:
  static ScopeInfo analyze(const Ast& ast);

  const std::vector<Scope>& scopes() const { return scopes_; }
  const std::vector<Binding>& bindings() const { return bindings_; }

  // Binding for an Identifier node (reference or declaration), or nullptr.
  const Binding* binding_of(int identifier_id) const;
  // Innermost scope containing a node.
  int scope_of(int node_id) const;
  // Resolves `name` as seen from `scope`, or nullptr (implicit global not yet seen).
  const Binding* lookup(int scope, const std::string& name) const;
  // True if the binding is lexically visible at the start of `node_id`.
  bool visible_at(const Binding& b, int node_id, const Ast& ast) const;
  bool is_reference(int identifier_id) const { return ref_binding_.count(identifier_id) > 0; }

 private:
  std::vector<Scope> scopes_;
  std::vector<Binding> bindings_;
  std::map<int, int> ref_binding_;   // identifier id -> binding index (references)
  std::map<int, int> decl_binding_;  // identifier id -> binding index (declarations)
  std::vector<int> node_scope_;      // node id -> scope index
  friend class ScopeBuilder;
};

}  // namespace wscan::js
