#include "wscan/static_analyzer.hpp"

#include <algorithm>
#include <functional>

#include "wscan/error.hpp"

namespace wscan {

using js::Binding;
using js::BindingKind;
using js::Node;
using js::NodeKind;
using nlohmann::json;

namespace {

const Node* enclosing_function(const Node& node) {
  for (const Node* p = node.parent; p; p = p->parent) {
    if (p->is_function()) return p;
  }
  return nullptr;
}

std::string last_segment(const std::string& path) {
  auto dot = path.rfind('.');
  return dot == std::string::npos ? path : path.substr(dot + 1);
}

bool is_argument_of(const Node& fn, const Node& call) {
  for (size_t i = 1; i < call.children.size(); ++i) {
    if (call.children[i].get() == &fn) return true;
  }
  return false;
}

std::string function_display_name(const Node& fn) {
  if (!fn.name.empty()) return fn.name;
  const Node* parent = fn.parent;
  if (!parent) return "anonymous";
  switch (parent->kind) {
    case NodeKind::VariableDeclarator:
      if (parent->children.size() > 1 && parent->children[1].get() == &fn &&
          parent->children[0]->kind == NodeKind::Identifier) {
        return parent->children[0]->name;
      }
      break;
    case NodeKind::AssignmentExpression:
      if (parent->children[1].get() == &fn) {
        if (auto path = target_path(*parent->children[0])) return last_segment(*path);
      }
      break;
    case NodeKind::Property:
      if (!parent->name.empty()) return parent->name;
      break;
    case NodeKind::AssignmentPattern:
      if (parent->children[0]->kind == NodeKind::Identifier) return parent->children[0]->name;
      break;
    case NodeKind::CallExpression:
    case NodeKind::NewExpression:
      if (parent->children[0].get() == &fn) return "anonymous-iife";
      if (is_argument_of(fn, *parent)) {
        if (auto path = target_path(*parent->children[0])) {
          return "anonymous-" + last_segment(*path) + "-callback";
        }
        return "anonymous-callback";
      }
      break;
    default:
      break;
  }
  return "anonymous";
}

std::vector<ChainEntry> chain_of(const js::Ast& ast, const Node& node) {
  std::vector<ChainEntry> chain;
  for (const Node* p = node.parent; p; p = p->parent) {
    if (p->is_function()) chain.push_back({function_display_name(*p), p->id, p->span});
  }
  std::reverse(chain.begin(), chain.end());
  if (chain.empty()) chain.push_back({"<program>", ast.program().id, ast.program().span});
  return chain;
}

// Identifiers whose values feed an expression. Callees and global namespace objects such as
// `CryptoJS` in `CryptoJS.enc.Hex` carry no data of their own and are skipped.
template <typename Fn>
void visit_expression_identifiers(const Node& node, const js::ScopeInfo& scopes, Fn&& fn) {
  if (node.kind == NodeKind::Identifier) {
    const Binding* b = scopes.binding_of(node.id);
    if (!b || !scopes.is_reference(node.id)) return;
    const Node* parent = node.parent;
    bool callee = parent && (parent->kind == NodeKind::CallExpression || parent->kind == NodeKind::NewExpression) &&
                  parent->children[0].get() == &node;
    bool namespace_object = b->kind == BindingKind::Global && parent && parent->kind == NodeKind::MemberExpression &&
                            parent->children[0].get() == &node;
    if (!callee && !namespace_object) fn(*b);
    return;
  }
  if (node.is_function()) return;
  for (const auto& c : node.children) visit_expression_identifiers(*c, scopes, fn);
}

std::optional<ConstantValue> literal_constant(const Node& expr) {
  if (expr.kind == NodeKind::Literal) {
    ConstantValue c;
    c.raw = expr.raw.empty() ? js::print_expression(expr) : expr.raw;
    c.node_id = expr.id;
    c.via = "literal";
    switch (expr.literal_type) {
      case js::LiteralType::String: c.value = expr.string_value; break;
      case js::LiteralType::Number: c.value = expr.number_value; break;
      case js::LiteralType::Boolean: c.value = expr.bool_value; break;
      case js::LiteralType::Null: c.value = nullptr; break;
      default: return std::nullopt;
    }
    return c;
  }
  if (expr.kind == NodeKind::TemplateLiteral && expr.children.size() == 1) {
    return ConstantValue{expr.children[0]->string_value, js::print_expression(expr), expr.id, "literal"};
  }
  if (expr.kind == NodeKind::UnaryExpression && expr.has(js::kPrefix) &&
      expr.children[0]->kind == NodeKind::Literal) {
    auto inner = literal_constant(*expr.children[0]);
    if (!inner) return std::nullopt;
    ConstantValue c;
    c.raw = js::print_expression(expr);
    c.node_id = expr.id;
    c.via = "literal";
    const json& v = inner->value;
    if (expr.name == "!") {
      bool truthy = v.is_boolean() ? v.get<bool>()
                    : v.is_number() ? v.get<double>() != 0
                    : v.is_string() ? !v.get<std::string>().empty()
                                    : false;
      c.value = !truthy;
      return c;
    }
    if ((expr.name == "-" || expr.name == "+") && v.is_number()) {
      c.value = expr.name == "-" ? -v.get<double>() : v.get<double>();
      return c;
    }
  }
  return std::nullopt;
}

// JSON numbers for integral doubles print without a fraction.
void tidy_number(ConstantValue& c) {
  if (c.value.is_number_float()) {
    double d = c.value.get<double>();
    if (d == static_cast<double>(static_cast<long long>(d)) && d < 9.0e15 && d > -9.0e15) {
      c.value = static_cast<long long>(d);
    }
  }
}

std::optional<ConstantValue> constant_of(const Node& expr, const js::Ast& ast, const js::ScopeInfo& scopes) {
  if (auto c = literal_constant(expr)) {
    tidy_number(*c);
    return c;
  }
  if (expr.kind == NodeKind::MemberExpression) {
    auto path = js::member_path(expr);
    const Node* root = &expr;
    while (root->kind == NodeKind::MemberExpression) root = root->children[0].get();
    if (path && root->kind == NodeKind::Identifier) {
      const Binding* b = scopes.binding_of(root->id);
      if (b && b->kind == BindingKind::Global) return ConstantValue{*path, *path, expr.id, "symbolic_path"};
    }
    return std::nullopt;
  }
  if (expr.kind == NodeKind::Identifier) {
    const Binding* b = scopes.binding_of(expr.id);
    if (!b || b->kind == BindingKind::Global || b->kind == BindingKind::Param ||
        b->kind == BindingKind::Function || b->kind == BindingKind::Catch) {
      return std::nullopt;
    }
    if (b->writes.size() != 1 || b->writes[0].value < 0) return std::nullopt;
    const Node* value = ast.node(b->writes[0].value);
    // The declarator must bind the identifier directly, not through a destructuring pattern.
    const Node* site = ast.node(b->writes[0].site);
    if (!value || !site) return std::nullopt;
    if (site->kind == NodeKind::VariableDeclarator && site->children[0]->kind != NodeKind::Identifier) {
      return std::nullopt;
    }
    if (site->kind == NodeKind::AssignmentExpression && site->name != "=") return std::nullopt;
    if (auto c = literal_constant(*value)) {
      tidy_number(*c);
      c->via = "propagated";
      return c;
    }
  }
  return std::nullopt;
}

// Options objects are flattened by property name. A name already taken by an earlier
// argument is kept under `<slot>.<name>` so later occurrences stay inspectable.
void harvest(const Node& arg, const std::string& slot, const std::string& top, FunctionMatch& m,
             const js::Ast& ast, const js::ScopeInfo& scopes) {
  auto key = [&] { return m.hardcoded_params.count(slot) || m.symbolic_params.count(slot) ? top + "." + slot : slot; };
  if (auto c = constant_of(arg, ast, scopes)) {
    m.hardcoded_params.emplace(key(), std::move(*c));
    return;
  }
  if (arg.kind == NodeKind::ObjectLiteral) {
    for (const auto& prop : arg.children) {
      if (prop->kind != NodeKind::Property || prop->has(js::kComputed) || prop->has(js::kMethod)) continue;
      harvest(*prop->children[1], prop->name, top, m, ast, scopes);
    }
    return;
  }
  if (arg.kind == NodeKind::Identifier) m.symbolic_params.emplace(key(), arg.name);
}

void enrich(const js::Ast& ast, const js::ScopeInfo& scopes, FunctionMatch& m) {
  const Node* node = ast.node(m.node_id);
  if (!node) return;
  m.enclosing_chain = chain_of(ast, *node);
  if (m.kind != MatchKind::Crypto || node->kind != NodeKind::CallExpression) return;
  for (size_t i = 1; i < node->children.size(); ++i) {
    size_t index = i - 1;
    std::string slot = index < m.param_schema.size() ? m.param_schema[index] : "arg" + std::to_string(index);
    harvest(*node->children[i], slot, slot, m, ast, scopes);
  }
}

std::vector<FunctionMatch> match_nodes(const js::Ast& ast, const ValuableFunctionDb& db) {
  std::vector<FunctionMatch> out;
  for (const Node* node : js::walk(ast)) {
    std::optional<std::string> path;
    bool is_call = node->kind == NodeKind::CallExpression;
    if (is_call) {
      path = target_path(*node->children[0]);
    } else if (node->kind == NodeKind::AssignmentExpression) {
      path = target_path(*node->children[0]);
    }
    if (!path) continue;

    FunctionMatch m;
    m.file = ast.file_path();
    m.node_id = node->id;
    m.span = node->span;
    m.callee_path = *path;
    bool matched = false;
    if (is_call) {
      for (const auto& c : db.crypto) {
        if (!c.pattern.matches(*path)) continue;
        m.kind = MatchKind::Crypto;
        m.matched_pattern = c.pattern.source();
        m.role = std::string(role_name(c.role));
        m.param_schema = c.params;
        m.iterations_slot = c.iterations;
        matched = true;
        break;
      }
    }
    if (!matched) {
      for (const auto& s : db.sinks) {
        if ((s.form == SinkForm::Call) != is_call || !s.pattern.matches(*path)) continue;
        m.kind = MatchKind::Sink;
        m.matched_pattern = s.pattern.source();
        m.role = std::string(sink_kind_name(s.kind));
        m.sink_form = s.form;
        m.sink_arg = s.arg;
        matched = true;
        break;
      }
    }
    if (matched) out.push_back(std::move(m));
  }
  return out;
}

// Statement that owns `node` for insertion purposes: its parent is a statement list, a
// statement body slot, or an arrow function's expression body.
const Node* insertion_anchor(const Node& node) {
  const Node* cur = &node;
  while (cur->parent) {
    const Node* parent = cur->parent;
    switch (parent->kind) {
      case NodeKind::Program:
      case NodeKind::BlockStatement:
        return cur;
      case NodeKind::SwitchCase:
        if (parent->name == "default" || parent->children[0].get() != cur) return cur;
        break;
      case NodeKind::IfStatement:
        if (parent->children[0].get() != cur) return cur;
        break;
      case NodeKind::ForStatement:
        if (parent->children[3].get() == cur) return cur;
        break;
      case NodeKind::ForInStatement:
        if (parent->children[2].get() == cur) return cur;
        break;
      case NodeKind::WhileStatement:
        if (parent->children[1].get() == cur) return cur;
        break;
      case NodeKind::DoWhileStatement:
        if (parent->children[0].get() == cur) return cur;
        break;
      case NodeKind::ArrowFunction:
        if (parent->has(js::kExpressionBody) && parent->children.back().get() == cur) return cur;
        break;
      default:
        break;
    }
    cur = parent;
  }
  return cur;
}

bool within(const Node& inner, const Node& outer) {
  for (const Node* p = &inner; p; p = p->parent) {
    if (p == &outer) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> FunctionMatch::chain_names() const {
  std::vector<std::string> out;
  for (const auto& e : enclosing_chain) out.push_back(e.name);
  return out;
}

std::string_view transfer_name(Transfer t) {
  switch (t) {
    case Transfer::Assign: return "assign";
    case Transfer::CallArg: return "call_arg";
    case Transfer::Return: return "return";
    case Transfer::Concat: return "concat";
    case Transfer::Member: return "member";
  }
  return "assign";
}

const std::vector<FlowEdge>& FlowGraph::edges(int v) const {
  static const std::vector<FlowEdge> kNone;
  auto it = inputs.find(v);
  return it == inputs.end() ? kNone : it->second;
}

std::optional<std::string> target_path(const Node& node) {
  if (node.kind == NodeKind::Identifier) return node.name;
  if (node.kind == NodeKind::ThisExpression) return std::string("this");
  if (node.kind != NodeKind::MemberExpression) return std::nullopt;
  if (auto path = js::member_path(node)) return path;
  std::vector<const std::string*> suffix;
  const Node* cur = &node;
  while (cur->kind == NodeKind::MemberExpression && !cur->has(js::kComputed)) {
    suffix.push_back(&cur->children[1]->name);
    cur = cur->children[0].get();
  }
  if (suffix.empty()) return std::nullopt;
  std::string out = "?";
  for (auto it = suffix.rbegin(); it != suffix.rend(); ++it) out += "." + **it;
  return out;
}

// ---- file analysis / flow graph ----

FileAnalysis::FileAnalysis(const js::Ast& ast, const ValuableFunctionDb& db)
    : ast_(ast), db_(db), scopes_(js::ScopeInfo::analyze(ast)) {
  build_graph();
}

const Node* FileAnalysis::local_callee(const Node& call) const {
  if (call.kind != NodeKind::CallExpression) return nullptr;
  const Node& callee = *call.children[0];
  if (callee.kind == NodeKind::FunctionExpression || callee.kind == NodeKind::ArrowFunction) return &callee;
  if (callee.kind != NodeKind::Identifier) return nullptr;
  const Binding* b = scopes_.binding_of(callee.id);
  if (!b) return nullptr;
  if (b->kind == BindingKind::Function) return ast_.node(b->function);
  if (b->kind == BindingKind::Global || b->kind == BindingKind::Param || b->writes.size() != 1 ||
      b->writes[0].value < 0) {
    return nullptr;
  }
  const Node* value = ast_.node(b->writes[0].value);
  if (value && (value->kind == NodeKind::FunctionExpression || value->kind == NodeKind::ArrowFunction)) {
    return value;
  }
  return nullptr;
}

int FileAnalysis::vertex(const Node& expr) const {
  switch (expr.kind) {
    case NodeKind::Identifier: {
      const Binding* b = scopes_.binding_of(expr.id);
      if (!b || b->kind == BindingKind::Function) return -1;
      return b->decl;
    }
    case NodeKind::Literal:
    case NodeKind::FunctionExpression:
    case NodeKind::ArrowFunction:
    case NodeKind::UnaryExpression:
      return -1;
    case NodeKind::TemplateLiteral:
      return expr.children.size() == 1 ? -1 : expr.id;
    case NodeKind::BinaryExpression:
      if (expr.name == "+" || expr.name == "||" || expr.name == "&&" || expr.name == "??") return expr.id;
      return -1;
    case NodeKind::SpreadElement:
      return vertex(*expr.children[0]);
    default:
      return expr.id;
  }
}

namespace {

void flatten_concat(const Node& n, std::vector<const Node*>& out) {
  if (n.kind == NodeKind::BinaryExpression && n.name == "+") {
    flatten_concat(*n.children[0], out);
    flatten_concat(*n.children[1], out);
  } else if (n.kind == NodeKind::TemplateLiteral) {
    for (size_t i = 1; i < n.children.size(); i += 2) flatten_concat(*n.children[i], out);
  } else {
    out.push_back(&n);
  }
}

void collect_returns(const Node& n, std::vector<const Node*>& out) {
  for (const auto& c : n.children) {
    if (c->is_function()) continue;
    if (c->kind == NodeKind::ReturnStatement && !c->children.empty()) out.push_back(c->children[0].get());
    collect_returns(*c, out);
  }
}

}  // namespace

void FileAnalysis::add_inputs(const Node& expr) {
  std::vector<FlowEdge> edges;
  auto add = [&](const Node& from, Transfer kind) {
    int v = vertex(from);
    if (v < 0) return;
    FlowEdge e{v, kind};
    if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
  };
  bool external = false;
  switch (expr.kind) {
    case NodeKind::BinaryExpression:
      if (expr.name == "+") {
        std::vector<const Node*> operands;
        flatten_concat(expr, operands);
        for (const Node* op : operands) add(*op, Transfer::Concat);
      } else {
        add(*expr.children[0], Transfer::Assign);
        add(*expr.children[1], Transfer::Assign);
      }
      break;
    case NodeKind::TemplateLiteral: {
      std::vector<const Node*> operands;
      flatten_concat(expr, operands);
      for (const Node* op : operands) add(*op, Transfer::Concat);
      break;
    }
    case NodeKind::ConditionalExpression:
      add(*expr.children[1], Transfer::Assign);
      add(*expr.children[2], Transfer::Assign);
      break;
    case NodeKind::AwaitExpression:
      add(*expr.children[0], Transfer::Assign);
      break;
    case NodeKind::SequenceExpression:
      add(*expr.children.back(), Transfer::Assign);
      break;
    case NodeKind::ArrayLiteral:
      for (const auto& el : expr.children) {
        if (el->kind != NodeKind::Elision) add(*el, Transfer::Assign);
      }
      break;
    case NodeKind::ObjectLiteral:
      for (const auto& prop : expr.children) {
        if (prop->kind == NodeKind::SpreadElement) {
          add(*prop->children[0], Transfer::Assign);
        } else if (!prop->has(js::kMethod)) {
          add(*prop->children[1], Transfer::Assign);
        }
      }
      break;
    case NodeKind::AssignmentExpression:
      if (expr.name == "=") {
        add(*expr.children[1], Transfer::Assign);
      } else {
        add(*expr.children[0], Transfer::Concat);
        add(*expr.children[1], Transfer::Concat);
      }
      break;
    case NodeKind::MemberExpression:
      if (expr.has(js::kComputed)) break;  // opaque
      add(*expr.children[0], Transfer::Member);
      if (auto path = js::member_path(expr)) {
        auto it = static_writes_.find(*path);
        if (it != static_writes_.end()) {
          for (int rhs : it->second) add(*ast_.node(rhs), Transfer::Assign);
        }
      }
      break;
    case NodeKind::CallExpression:
    case NodeKind::NewExpression: {
      if (const Node* fn = local_callee(expr)) {
        std::vector<const Node*> returns;
        if (fn->has(js::kExpressionBody)) {
          returns.push_back(fn->function_body());
        } else {
          collect_returns(*fn->function_body(), returns);
        }
        for (const Node* r : returns) add(*r, Transfer::Return);
        break;
      }
      for (size_t i = 1; i < expr.children.size(); ++i) add(*expr.children[i], Transfer::CallArg);
      const Node& callee = *expr.children[0];
      if (callee.kind == NodeKind::MemberExpression) {
        const Node& receiver = *callee.children[0];
        const Binding* rb =
            receiver.kind == NodeKind::Identifier ? scopes_.binding_of(receiver.id) : nullptr;
        bool namespace_receiver = rb && rb->kind == BindingKind::Global;
        if (!namespace_receiver) add(receiver, Transfer::Member);
      }
      external = edges.empty();
      break;
    }
    default:
      break;
  }
  if (!edges.empty()) graph_.inputs[expr.id] = std::move(edges);
  if (external) graph_.external.insert(expr.id);
}

void FileAnalysis::mark_message_handlers() {
  const SourcePattern* message = nullptr;
  for (const auto& s : db_.sources) {
    if (s.pattern.matches("$message")) {
      message = &s;
      break;
    }
  }
  if (!message) return;
  auto mark_handler = [&](const Node& fn) {
    if (!fn.is_function() || fn.param_count() == 0) return;
    const Node& param = *fn.children[0];
    if (param.kind == NodeKind::Identifier) graph_.sources[param.id] = message;
  };
  for (const Node* n : js::walk(ast_)) {
    if (n->kind == NodeKind::CallExpression && n->children.size() >= 3) {
      auto path = target_path(*n->children[0]);
      const Node& type = *n->children[1];
      if (path && last_segment(*path) == "addEventListener" && type.is_string_literal() &&
          type.string_value == "message") {
        mark_handler(*n->children[2]);
      }
    } else if (n->kind == NodeKind::AssignmentExpression && n->name == "=") {
      auto path = target_path(*n->children[0]);
      if (path && last_segment(*path) == "onmessage") mark_handler(*n->children[1]);
    }
  }
}

void FileAnalysis::build_graph() {
  std::vector<const Node*> nodes = js::walk(ast_);
  for (const Node* n : nodes) {
    if (n->kind == NodeKind::CallExpression) {
      if (const Node* fn = local_callee(*n)) call_sites_[fn->id].push_back(n->id);
    } else if (n->kind == NodeKind::AssignmentExpression && n->name == "=" &&
               n->children[0]->kind == NodeKind::MemberExpression) {
      if (auto path = js::member_path(*n->children[0])) static_writes_[*path].push_back(n->children[1]->id);
    }
  }

  for (const Node* n : nodes) {
    if (n->kind == NodeKind::Identifier || n->kind == NodeKind::Property || n->kind == NodeKind::Program) {
      continue;
    }
    if (vertex(*n) == n->id) add_inputs(*n);
  }

  for (const auto& b : scopes_.bindings()) {
    if (b.kind == BindingKind::Function) continue;
    std::vector<FlowEdge> edges;
    auto add = [&](const Node* from, Transfer kind) {
      if (!from) return;
      int v = vertex(*from);
      if (v < 0) return;
      FlowEdge e{v, kind};
      if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
    };
    for (const auto& w : b.writes) {
      if (w.value >= 0) add(ast_.node(w.value), Transfer::Assign);
    }
    if (b.kind == BindingKind::Global) {
      graph_.external.insert(b.decl);
    } else if (b.kind == BindingKind::Param) {
      const Node* fn = ast_.node(b.function);
      auto sites = call_sites_.find(b.function);
      if (!fn || sites == call_sites_.end()) {
        graph_.external.insert(b.decl);
      } else {
        // Which top-level parameter slot holds this identifier?
        size_t slot = 0;
        const Node* decl = ast_.node(b.decl);
        for (size_t i = 0; i < fn->param_count(); ++i) {
          if (decl && within(*decl, *fn->children[i])) slot = i;
        }
        bool rest = fn->children[slot]->kind == NodeKind::SpreadElement;
        for (int site : sites->second) {
          const Node* call = ast_.node(site);
          if (rest) {
            for (size_t i = slot + 1; i < call->children.size(); ++i) {
              add(call->children[i].get(), Transfer::CallArg);
            }
          } else if (slot + 1 < call->children.size()) {
            add(call->children[slot + 1].get(), Transfer::CallArg);
          }
        }
      }
    }
    if (!edges.empty()) graph_.inputs[b.decl] = std::move(edges);
  }

  for (const Node* n : nodes) {
    if (n->kind != NodeKind::MemberExpression || n->has(js::kComputed)) continue;
    auto path = js::member_path(*n);
    if (!path) continue;
    for (const auto& s : db_.sources) {
      if (s.pattern.matches(*path)) {
        graph_.sources[n->id] = &s;
        break;
      }
    }
  }
  mark_message_handlers();
}

// ---- taint enumeration ----

std::vector<std::pair<std::vector<TaintStep>, int>> enumerate_paths(const FlowGraph& g, TaintStep start,
                                                                    const TaintLimits& limits,
                                                                    bool* truncated) {
  std::vector<std::pair<std::vector<TaintStep>, int>> out;
  std::vector<TaintStep> path{start};
  std::set<int> on_path{start.node_id};
  bool cut = false;

  std::function<void()> dfs = [&] {
    if (out.size() >= limits.max_traces) {
      cut = true;
      return;
    }
    int v = path.back().node_id;
    if (g.sources.count(v)) {
      out.emplace_back(path, 1);
      return;
    }
    if (g.external.count(v)) {
      auto steps = path;
      steps.back().transfer = Transfer::CallArg;
      out.emplace_back(std::move(steps), 0);
    }
    if (path.size() >= limits.max_depth) {
      if (!g.edges(v).empty()) cut = true;
      return;
    }
    for (const FlowEdge& e : g.edges(v)) {
      if (on_path.count(e.to)) continue;
      path.push_back({e.to, e.kind});
      on_path.insert(e.to);
      dfs();
      on_path.erase(e.to);
      path.pop_back();
    }
  };
  dfs();
  // Repeated operands (`a + a`) give parallel edges and identical paths.
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (truncated) *truncated = cut;
  return out;
}

const Node* sink_argument(const js::Ast& ast, const FunctionMatch& sink) {
  const Node* node = ast.node(sink.node_id);
  if (!node) return nullptr;
  if (sink.sink_form == SinkForm::Assign) {
    return node->kind == NodeKind::AssignmentExpression ? node->children[1].get() : nullptr;
  }
  if (node->kind != NodeKind::CallExpression || sink.sink_arg + 1 >= node->children.size()) return nullptr;
  return node->children[sink.sink_arg + 1].get();
}

std::vector<TaintTrace> backtrack_taint(const FileAnalysis& fa, const FunctionMatch& sink,
                                        const TaintLimits& limits) {
  std::vector<TaintTrace> traces;
  if (sink.kind != MatchKind::Sink) return traces;
  const Node* arg = sink_argument(fa.ast(), sink);
  if (!arg) return traces;
  int v = fa.vertex(*arg);
  if (v < 0) return traces;
  TaintStep start{v, sink.sink_form == SinkForm::Call ? Transfer::CallArg : Transfer::Assign};
  const FlowGraph& g = fa.graph();
  for (auto& [steps, resolved] : enumerate_paths(g, start, limits)) {
    TaintTrace t;
    t.sink = sink;
    t.resolved = resolved == 1;
    if (t.resolved) {
      const SourcePattern* src = g.sources.at(steps.back().node_id);
      t.source = src->pattern.source();
      t.externally_modifiable = src->externally_modifiable;
    }
    for (const auto& step : steps) {
      const Node* n = fa.ast().node(step.node_id);
      t.step_spans.push_back(n ? n->span : js::Span{});
      std::string text = n ? (n->kind == NodeKind::Identifier ? n->name : js::print_expression(*n)) : "";
      if (text.size() > 160) text = text.substr(0, 157) + "...";
      t.step_text.push_back(std::move(text));
    }
    t.steps = std::move(steps);
    traces.push_back(std::move(t));
  }
  return traces;
}

std::vector<TaintTrace> backtrack_taint(const js::Ast& ast, const FunctionMatch& sink,
                                        const ValuableFunctionDb& db) {
  FileAnalysis fa(ast, db);
  return backtrack_taint(fa, sink);
}

// ---- matching ----

std::vector<FunctionMatch> match_valuable_functions(const js::Ast& ast, const ValuableFunctionDb& db) {
  auto matches = match_nodes(ast, db);
  if (matches.empty()) return matches;
  js::ScopeInfo scopes = js::ScopeInfo::analyze(ast);
  for (auto& m : matches) enrich(ast, scopes, m);
  return matches;
}

FunctionMatch forward_search(const js::Ast& ast, const FunctionMatch& match) {
  if (!ast.node(match.node_id)) {
    throw Error(ErrorCode::kSchemaViolation, "match does not belong to " + ast.file_path());
  }
  FunctionMatch out = match;
  out.enclosing_chain.clear();
  out.hardcoded_params.clear();
  out.symbolic_params.clear();
  js::ScopeInfo scopes = js::ScopeInfo::analyze(ast);
  enrich(ast, scopes, out);
  return out;
}

// ---- instrumentation planning ----

InstrumentationPlan plan_instrumentation(const FileAnalysis& fa, const FunctionMatch& match) {
  const js::Ast& ast = fa.ast();
  const js::ScopeInfo& scopes = fa.scopes();
  const Node* call = ast.node(match.node_id);
  if (!call) throw Error(ErrorCode::kSchemaViolation, "match does not belong to " + ast.file_path());

  InstrumentationPlan plan;
  plan.file = match.file;
  plan.plan_id = match.file + "#" + std::to_string(match.node_id);
  plan.target_match = match;

  const Node* envelope = enclosing_function(*call);
  if (envelope) {
    plan.envelope_name = function_display_name(*envelope);
    plan.envelope_node = envelope->id;
    plan.envelope_span = envelope->span;
  } else {
    plan.synthetic_envelope = true;
    plan.envelope_name = "<program>";
    plan.envelope_node = ast.program().id;
    plan.envelope_span = ast.program().span;
  }
  const Node& env = envelope ? *envelope : ast.program();

  auto in_envelope = [&](const Binding& b) {
    if (b.kind == BindingKind::Global) return false;
    if (b.kind == BindingKind::Param) return b.function == env.id;
    const Node* decl = ast.node(b.decl);
    if (!decl) return false;
    const Node* owner = enclosing_function(*decl);
    return envelope ? owner == envelope : owner == nullptr;
  };

  std::set<int> seen;
  std::set<std::string> captured;
  std::set<std::string> derived;
  std::vector<const Binding*> derived_bindings;
  std::vector<const Binding*> work;
  auto push = [&](const Binding& b) {
    if (b.kind == BindingKind::Function || !seen.insert(b.index).second) return;
    work.push_back(&b);
  };
  for (size_t i = 1; i < call->children.size(); ++i) {
    visit_expression_identifiers(*call->children[i], scopes, push);
  }
  bool touches_global = false;
  while (!work.empty()) {
    const Binding* b = work.back();
    work.pop_back();
    bool local = in_envelope(*b) && b->kind != BindingKind::Param;
    if (!local) {
      captured.insert(b->name);
      touches_global |= b->kind == BindingKind::Global;
      continue;
    }
    derived.insert(b->name);
    derived_bindings.push_back(b);
    for (const auto& w : b->writes) {
      if (w.value < 0) continue;
      visit_expression_identifiers(*ast.node(w.value), scopes, push);
    }
  }

  // Insert before the earliest statement computing a derived value, or before the call.
  const Node* anchor = insertion_anchor(*call);
  for (const Binding* b : derived_bindings) {
    for (const auto& w : b->writes) {
      const Node* site = ast.node(w.site >= 0 ? w.site : w.value);
      if (!site || enclosing_function(*site) != envelope) continue;
      const Node* candidate = insertion_anchor(*site);
      if (within(*candidate, env) && candidate->span.begin < anchor->span.begin) anchor = candidate;
    }
  }
  plan.insert_before = anchor->id;
  plan.insertion_span = anchor->span;

  int scope = scopes.scope_of(anchor->id);
  bool dropped = false;
  for (const auto& name : captured) {
    const Binding* b = scopes.lookup(scope, name);
    bool ok = !b || scopes.visible_at(*b, anchor->id, ast);
    if (ok) {
      plan.captured_bindings.push_back(name);
    } else {
      dropped = true;
    }
  }
  plan.derived_bindings.assign(derived.begin(), derived.end());

  // Which argument slots each captured binding reaches, directly or through locals.
  for (size_t i = 1; i < call->children.size(); ++i) {
    size_t index = i - 1;
    std::string slot = index < match.param_schema.size() ? match.param_schema[index] : "arg" + std::to_string(index);
    std::set<int> visited;
    std::vector<const Binding*> pending;
    auto reach = [&](const Binding& b) {
      if (b.kind != BindingKind::Function && visited.insert(b.index).second) pending.push_back(&b);
    };
    visit_expression_identifiers(*call->children[i], scopes, reach);
    while (!pending.empty()) {
      const Binding* b = pending.back();
      pending.pop_back();
      if (!derived.count(b->name) || !in_envelope(*b)) {
        if (std::find(plan.captured_bindings.begin(), plan.captured_bindings.end(), b->name) !=
            plan.captured_bindings.end()) {
          auto& slots = plan.binding_slots[b->name];
          if (std::find(slots.begin(), slots.end(), slot) == slots.end()) slots.push_back(slot);
        }
        continue;
      }
      for (const auto& w : b->writes) {
        if (w.value >= 0) visit_expression_identifiers(*ast.node(w.value), scopes, reach);
      }
    }
  }
  bool anonymous_callback = envelope && plan.envelope_name.starts_with("anonymous");
  plan.capture_may_fail = anonymous_callback || dropped || touches_global;
  return plan;
}

InstrumentationPlan plan_instrumentation(const js::Ast& ast, const FunctionMatch& match) {
  static const ValuableFunctionDb kEmpty;
  FileAnalysis fa(ast, kEmpty);
  return plan_instrumentation(fa, match);
}

bool plan_well_formed(const FileAnalysis& fa, const InstrumentationPlan& plan, std::string* why) {
  const js::Ast& ast = fa.ast();
  const Node* anchor = ast.node(plan.insert_before);
  const Node* env = ast.node(plan.envelope_node);
  auto fail = [&](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };
  if (!anchor || !env) return fail("plan nodes missing from tree");
  if (!within(*anchor, *env) || anchor == env) return fail("insertion point outside envelope");
  if (enclosing_function(*anchor) != (plan.synthetic_envelope ? nullptr : env)) {
    return fail("insertion point inside a nested function");
  }
  int scope = fa.scopes().scope_of(anchor->id);
  for (const auto& name : plan.captured_bindings) {
    const Binding* b = fa.scopes().lookup(scope, name);
    if (b && !fa.scopes().visible_at(*b, anchor->id, ast)) return fail(name + " not visible at insertion");
  }
  return true;
}

// ---- JSON ----

namespace {

json span_json(const js::Span& s) {
  return {{"start_line", s.start_line}, {"start_col", s.start_col}, {"end_line", s.end_line}, {"end_col", s.end_col}};
}

js::Span span_from_json(const json& j) {
  js::Span s;
  s.start_line = j.at("start_line").get<int>();
  s.start_col = j.at("start_col").get<int>();
  s.end_line = j.at("end_line").get<int>();
  s.end_col = j.at("end_col").get<int>();
  return s;
}

}  // namespace

json to_json(const FunctionMatch& m) {
  json j;
  j["file"] = m.file;
  j["node_id"] = m.node_id;
  j["span"] = span_json(m.span);
  j["kind"] = m.kind == MatchKind::Crypto ? "crypto" : "sink";
  j["pattern"] = m.matched_pattern;
  j["callee"] = m.callee_path;
  j["role"] = m.role;
  if (m.kind == MatchKind::Crypto) {
    j["param_schema"] = m.param_schema;
    j["iterations_slot"] = m.iterations_slot ? json(*m.iterations_slot) : json(nullptr);
  } else {
    j["sink_form"] = m.sink_form == SinkForm::Call ? "call" : "assign";
    j["sink_arg"] = m.sink_arg;
  }
  j["enclosing_chain"] = m.chain_names();
  json hard = json::object();
  for (const auto& [slot, c] : m.hardcoded_params) hard[slot] = {{"value", c.value}, {"raw", c.raw}, {"via", c.via}};
  j["hardcoded_params"] = std::move(hard);
  j["symbolic_params"] = m.symbolic_params;
  return j;
}

FunctionMatch match_from_json(const json& j) {
  FunctionMatch m;
  m.file = j.at("file").get<std::string>();
  m.node_id = j.at("node_id").get<int>();
  m.span = span_from_json(j.at("span"));
  m.kind = j.at("kind").get<std::string>() == "crypto" ? MatchKind::Crypto : MatchKind::Sink;
  m.matched_pattern = j.at("pattern").get<std::string>();
  m.callee_path = j.at("callee").get<std::string>();
  m.role = j.at("role").get<std::string>();
  if (j.contains("param_schema")) m.param_schema = j["param_schema"].get<std::vector<std::string>>();
  if (j.contains("iterations_slot") && j["iterations_slot"].is_string()) {
    m.iterations_slot = j["iterations_slot"].get<std::string>();
  }
  if (j.contains("sink_form")) m.sink_form = j["sink_form"] == "call" ? SinkForm::Call : SinkForm::Assign;
  if (j.contains("sink_arg")) m.sink_arg = j["sink_arg"].get<size_t>();
  for (const auto& name : j.at("enclosing_chain")) m.enclosing_chain.push_back({name.get<std::string>(), -1, {}});
  for (const auto& [slot, c] : j.at("hardcoded_params").items()) {
    m.hardcoded_params[slot] = {c.at("value"), c.at("raw").get<std::string>(), -1, c.at("via").get<std::string>()};
  }
  m.symbolic_params = j.at("symbolic_params").get<std::map<std::string, std::string>>();
  return m;
}

json to_json(const TaintTrace& t) {
  json steps = json::array();
  for (size_t i = 0; i < t.steps.size(); ++i) {
    json step = {{"node_id", t.steps[i].node_id}, {"transfer", transfer_name(t.steps[i].transfer)}};
    if (i < t.step_spans.size()) step["span"] = span_json(t.step_spans[i]);
    if (i < t.step_text.size()) step["text"] = t.step_text[i];
    steps.push_back(std::move(step));
  }
  json j;
  j["sink"] = to_json(t.sink);
  j["steps"] = std::move(steps);
  j["source"] = t.source ? json(*t.source) : json(nullptr);
  j["externally_modifiable"] = t.externally_modifiable;
  j["resolved"] = t.resolved;
  return j;
}

TaintTrace trace_from_json(const json& j) {
  static const std::map<std::string, Transfer> kTransfers = {{"assign", Transfer::Assign},
                                                             {"call_arg", Transfer::CallArg},
                                                             {"return", Transfer::Return},
                                                             {"concat", Transfer::Concat},
                                                             {"member", Transfer::Member}};
  TaintTrace t;
  t.sink = match_from_json(j.at("sink"));
  for (const auto& step : j.at("steps")) {
    t.steps.push_back({step.at("node_id").get<int>(), kTransfers.at(step.at("transfer").get<std::string>())});
    t.step_spans.push_back(step.contains("span") ? span_from_json(step["span"]) : js::Span{});
    t.step_text.push_back(step.value("text", std::string()));
  }
  if (j.at("source").is_string()) t.source = j["source"].get<std::string>();
  t.externally_modifiable = j.at("externally_modifiable").get<bool>();
  t.resolved = j.at("resolved").get<bool>();
  return t;
}

json to_json(const InstrumentationPlan& p) {
  return {{"plan_id", p.plan_id},
          {"file", p.file},
          {"envelope", p.envelope_name},
          {"envelope_span", span_json(p.envelope_span)},
          {"synthetic_envelope", p.synthetic_envelope},
          {"insert_before", p.insert_before},
          {"insertion_span", span_json(p.insertion_span)},
          {"captured_bindings", p.captured_bindings},
          {"derived_bindings", p.derived_bindings},
          {"binding_slots", p.binding_slots},
          {"capture_may_fail", p.capture_may_fail},
          {"role", p.target_match.role},
          {"callee", p.target_match.callee_path}};
}

StaticFileResult analyze_script(const std::string& file, const std::string& source, const ValuableFunctionDb& db) {
  StaticFileResult r;
  r.file = file;
  js::Ast ast;
  try {
    ast = js::parse_script(source, file);
  } catch (const ParseFailure& e) {
    r.unsupported = e.code() == ErrorCode::kParseUnsupported;
    r.parse_note = std::string(error_code_name(e.code())) + " at " + std::to_string(e.line()) + ":" +
                   std::to_string(e.column()) + ": " + e.what();
    return r;
  }
  r.parsed = true;
  r.matches = match_nodes(ast, db);
  if (r.matches.empty()) return r;
  FileAnalysis fa(ast, db);
  for (auto& m : r.matches) enrich(ast, fa.scopes(), m);
  for (const auto& m : r.matches) {
    if (m.kind == MatchKind::Sink) {
      auto traces = backtrack_taint(fa, m);
      r.traces.insert(r.traces.end(), traces.begin(), traces.end());
    } else {
      r.plans.push_back(plan_instrumentation(fa, m));
    }
  }
  return r;
}

}  // namespace wscan
