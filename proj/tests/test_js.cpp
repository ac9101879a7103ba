#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/checks.hpp"
#include "wscan/ast.hpp"
#include "wscan/error.hpp"
#include "wscan/extension.hpp"
#include "wscan/scope.hpp"

namespace fs = std::filesystem;
using namespace wscan;
using namespace wscan::js;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(wscan::testing::fixtures_dir() / "js" / name);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

// All JavaScript the repository ships as fixtures.
std::vector<fs::path> js_fixtures() {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(wscan::testing::fixtures_dir())) {
    if (e.path().extension() == ".js") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Parser, DecryptExampleHasAesDecryptCall) {
  Ast ast = parse_script(fixture("unlock.js"));
  bool found = false;
  for (const Node* n : walk(ast)) {
    if (n->kind == NodeKind::CallExpression && member_path(*n->children[0]) == "CryptoJS.AES.decrypt") found = true;
  }
  EXPECT_TRUE(found);
}

TEST(Parser, EmptyProgram) {
  Ast ast = parse_script("");
  EXPECT_EQ(ast.program().kind, NodeKind::Program);
  EXPECT_TRUE(ast.program().children.empty());
}

TEST(Parser, ErrorPosition) {
  try {
    parse_script("function f( {");
    FAIL() << "expected a parse error";
  } catch (const ParseFailure& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 13);
  }
}

TEST(Parser, UnsupportedSyntaxIsDistinguished) {
  try {
    parse_script("class A { #x = 1; }");
    FAIL() << "expected an error";
  } catch (const ParseFailure& e) {
    EXPECT_TRUE(e.code() == ErrorCode::kParseUnsupported || e.code() == ErrorCode::kParseError);
  }
}

TEST(Walk, SingleStatementCoversEveryNode) {
  Ast ast = parse_script("var a = b + 1;");
  EXPECT_EQ(walk(ast).size(), ast.size());
  // Program, VariableDeclaration, VariableDeclarator, a, BinaryExpression, b, 1
  EXPECT_EQ(ast.size(), 7u);
}

TEST(Walk, PreOrderVisitsOuterFunctionFirst) {
  Ast ast = parse_script(fixture("unlock.js"));
  int outer = -1, inner = -1, pos = 0;
  for (const Node* n : walk(ast, WalkOrder::Pre)) {
    if (n->kind == NodeKind::FunctionDeclaration && n->name == "UnlockExample") outer = pos;
    if (n->kind == NodeKind::FunctionDeclaration && n->name == "unlock") inner = pos;
    ++pos;
  }
  ASSERT_GE(outer, 0);
  EXPECT_LT(outer, inner);
}

TEST(Walk, PostOrderPutsParentsAfterChildren) {
  for (const auto& path : js_fixtures()) {
    std::ifstream in(path);
    std::string src((std::istreambuf_iterator<char>(in)), {});
    Ast ast = parse_script(normalize_source(src));
    std::map<const Node*, size_t> at;
    auto order = walk(ast, WalkOrder::Post);
    for (size_t i = 0; i < order.size(); ++i) at[order[i]] = i;
    for (const Node* n : order) {
      for (const auto& c : n->children) EXPECT_LT(at[c.get()], at[n]);
    }
  }
}

TEST(MemberPath, Examples) {
  Ast derive = parse_script(fixture("derive.js"));
  std::set<std::string> callees;
  for (const Node* n : walk(derive)) {
    if (n->kind == NodeKind::CallExpression) {
      if (auto p = member_path(*n->children[0])) callees.insert(*p);
    }
  }
  EXPECT_TRUE(callees.count("r.crypto.subtle.deriveKey"));
  Ast computed = parse_script("a[b].c;");
  EXPECT_FALSE(member_path(*computed.program().children[0]->children[0]));
  Ast doc = parse_script("document.getElementById;");
  EXPECT_EQ(member_path(*doc.program().children[0]->children[0]), "document.getElementById");
}

TEST(Printer, EmptyAndReturn) {
  EXPECT_EQ(print_canonical(parse_script("")), "\n");
  Ast ast = parse_script("function f() { return 1; }");
  std::string out = print_canonical(ast);
  EXPECT_NE(out.find("\n    return 1;\n"), std::string::npos) << out;
}

TEST(Printer, ParsePrintParseFixpoint) {
  auto files = js_fixtures();
  ASSERT_GE(files.size(), 20u);
  for (const auto& path : files) {
    std::ifstream in(path);
    std::string src((std::istreambuf_iterator<char>(in)), {});
    Ast first = parse_script(src);
    Ast second = parse_script(print_canonical(first));
    EXPECT_TRUE(structurally_equal(first.program(), second.program())) << path;
    EXPECT_EQ(print_canonical(second), print_canonical(first)) << path;
  }
}

TEST(Printer, SyntaxCoverageRoundTrips) {
  const char* src = R"JS(
const {a, b: [c, ...d], ...rest} = obj;
let t = `x${a + 1}y${b}`;
async function g(p = 1, ...q) { for (const k of q) { if (!k) continue; else break; } await p; }
var h = (x) => ({y: x?.z ?? 0});
for (var i = 0; i < 3; i++) { switch (i) { case 1: i += 2; break; default: ; } }
try { throw new Error("e"); } catch ({message}) { void message; } finally { delete o[k]; }
do { i--; } while (i > 0 && typeof i === "number");
x = a ? b : c, y = /re[/]g/.test(s), z = [1, , 3];
)JS";
  Ast first = parse_script(src);
  Ast second = parse_script(print_canonical(first));
  EXPECT_TRUE(structurally_equal(first.program(), second.program())) << print_canonical(first);
}

TEST(Scope, BindingsAndHoisting) {
  Ast ast = parse_script("function f(a) { var b = a; g(b); } var g = function (x) { return x; }; h = 1;");
  ScopeInfo s = ScopeInfo::analyze(ast);
  std::map<std::string, BindingKind> kinds;
  for (const auto& b : s.bindings()) kinds[b.name] = b.kind;
  EXPECT_EQ(kinds["f"], BindingKind::Function);
  EXPECT_EQ(kinds["a"], BindingKind::Param);
  EXPECT_EQ(kinds["b"], BindingKind::Var);
  EXPECT_EQ(kinds["g"], BindingKind::Var);
  EXPECT_EQ(kinds["h"], BindingKind::Global);
}
