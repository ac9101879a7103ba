#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wscan/ast.hpp"
#include "wscan/rules.hpp"
#include "wscan/scope.hpp"

namespace wscan {

struct ChainEntry {
  std::string name;
  int node_id = -1;  // function node; program node for `<program>`
  js::Span span;
};

struct ConstantValue {
  nlohmann::json value;  // string, number, boolean or null
  std::string raw;       // source text, e.g. `5e3` or `CryptoJS.mode.CBC`
  int node_id = -1;
  std::string via;  // literal | propagated | symbolic_path
};

enum class MatchKind { Crypto, Sink };

struct FunctionMatch {
  std::string file;
  int node_id = -1;  // CallExpression, or AssignmentExpression for property-write sinks
  js::Span span;
  MatchKind kind = MatchKind::Crypto;
  std::string matched_pattern;
  std::string callee_path;
  std::string role;  // crypto role or sink kind
  std::vector<std::string> param_schema;
  std::optional<std::string> iterations_slot;
  SinkForm sink_form = SinkForm::Call;
  size_t sink_arg = 0;
  std::vector<ChainEntry> enclosing_chain;
  std::map<std::string, ConstantValue> hardcoded_params;
  std::map<std::string, std::string> symbolic_params;  // slot -> identifier name

  std::vector<std::string> chain_names() const;
};

enum class Transfer { Assign, CallArg, Return, Concat, Member };
std::string_view transfer_name(Transfer t);

struct TaintStep {
  int node_id = -1;
  Transfer transfer = Transfer::Assign;
  friend bool operator==(const TaintStep&, const TaintStep&) = default;
  friend auto operator<=>(const TaintStep&, const TaintStep&) = default;
};

struct TaintTrace {
  FunctionMatch sink;
  std::vector<TaintStep> steps;
  std::optional<std::string> source;  // matched source pattern; empty for unresolved traces
  bool externally_modifiable = false;
  bool resolved = false;
  // Per step: source span and printed expression, for evidence.
  std::vector<js::Span> step_spans;
  std::vector<std::string> step_text;
};

struct FlowEdge {
  int to = -1;
  Transfer kind = Transfer::Assign;
  friend bool operator==(const FlowEdge&, const FlowEdge&) = default;
  friend auto operator<=>(const FlowEdge&, const FlowEdge&) = default;
};

// Backward def-use relation of one file. Vertices are expression node ids, with identifier
// references collapsed onto their binding's declaring node.
struct FlowGraph {
  std::map<int, std::vector<FlowEdge>> inputs;
  std::map<int, const SourcePattern*> sources;
  std::set<int> external;  // dead ends whose value comes from outside the file

  const std::vector<FlowEdge>& edges(int v) const;
};

// File-level analysis context shared by the operations below.
class FileAnalysis {
 public:
  FileAnalysis(const js::Ast& ast, const ValuableFunctionDb& db);

  const js::Ast& ast() const { return ast_; }
  const js::ScopeInfo& scopes() const { return scopes_; }
  const FlowGraph& graph() const { return graph_; }
  const ValuableFunctionDb& db() const { return db_; }

  // Flow vertex for an expression (identifier references map to their binding); -1 for
  // constants and other expressions that carry no taint.
  int vertex(const js::Node& expr) const;
  const js::Node* local_callee(const js::Node& call) const;

 private:
  void build_graph();
  void add_inputs(const js::Node& expr);
  void mark_message_handlers();

  const js::Ast& ast_;
  const ValuableFunctionDb& db_;
  js::ScopeInfo scopes_;
  FlowGraph graph_;
  std::map<int, std::vector<int>> call_sites_;  // function node -> local call nodes
  std::map<std::string, std::vector<int>> static_writes_;  // member path -> rhs nodes
};

// Static target path of a callee or assignment target: the member path when available,
// otherwise `?.` followed by the static suffix (e.g. `?.innerHTML`).
std::optional<std::string> target_path(const js::Node& node);

std::vector<FunctionMatch> match_valuable_functions(const js::Ast& ast, const ValuableFunctionDb& db);
FunctionMatch forward_search(const js::Ast& ast, const FunctionMatch& match);

struct TaintLimits {
  size_t max_traces = 4096;
  size_t max_depth = 256;
};

std::vector<TaintTrace> backtrack_taint(const FileAnalysis& fa, const FunctionMatch& sink,
                                        const TaintLimits& limits = {});
std::vector<TaintTrace> backtrack_taint(const js::Ast& ast, const FunctionMatch& sink,
                                        const ValuableFunctionDb& db);

// Node whose value reaches the sink (RHS for assignments, the configured argument for calls).
const js::Node* sink_argument(const js::Ast& ast, const FunctionMatch& sink);

// Enumerates all simple backward paths from `start` over the graph. Exposed for testing.
std::vector<std::pair<std::vector<TaintStep>, int>> enumerate_paths(const FlowGraph& g, TaintStep start,
                                                                    const TaintLimits& limits,
                                                                    bool* truncated = nullptr);

struct InstrumentationPlan {
  std::string plan_id;  // file#node_id
  std::string file;
  std::string envelope_name;
  int envelope_node = -1;
  js::Span envelope_span;
  bool synthetic_envelope = false;  // call at program top level
  int insert_before = -1;           // statement (or arrow expression body) node id
  js::Span insertion_span;
  std::vector<std::string> captured_bindings;
  std::vector<std::string> derived_bindings;
  bool capture_may_fail = false;
  // Captured binding -> argument slots its value reaches.
  std::map<std::string, std::vector<std::string>> binding_slots;
  FunctionMatch target_match;
};

InstrumentationPlan plan_instrumentation(const FileAnalysis& fa, const FunctionMatch& match);
InstrumentationPlan plan_instrumentation(const js::Ast& ast, const FunctionMatch& match);

// Programmatic well-formedness check: insertion inside the envelope and every captured
// binding visible there.
bool plan_well_formed(const FileAnalysis& fa, const InstrumentationPlan& plan, std::string* why = nullptr);

nlohmann::json to_json(const FunctionMatch& m);
FunctionMatch match_from_json(const nlohmann::json& j);
TaintTrace trace_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TaintTrace& t);
nlohmann::json to_json(const InstrumentationPlan& p);

struct StaticFileResult {
  std::string file;
  bool parsed = false;
  bool unsupported = false;
  std::string parse_note;
  std::vector<FunctionMatch> matches;
  std::vector<TaintTrace> traces;
  std::vector<InstrumentationPlan> plans;
};

// Full per-file static pass: match, enrich, backtrack sinks, plan crypto calls.
StaticFileResult analyze_script(const std::string& file, const std::string& source,
                                const ValuableFunctionDb& db);

}  // namespace wscan
