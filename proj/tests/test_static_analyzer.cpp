#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "support/checks.hpp"
#include "wscan/error.hpp"
#include "wscan/extension.hpp"
#include "wscan/static_analyzer.hpp"

using namespace wscan;
using wscan::testing::fixtures_dir;

namespace {

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

StaticFileResult analyze(const std::string& name, const std::string& source) {
  static const ValuableFunctionDb db = default_rules();
  return analyze_script(name, normalize_source(source), db);
}

const FunctionMatch* find_role(const StaticFileResult& r, const std::string& role) {
  for (const auto& m : r.matches)
    if (m.role == role) return &m;
  return nullptr;
}

const FunctionMatch* find_callee(const StaticFileResult& r, const std::string& suffix) {
  for (const auto& m : r.matches)
    if (m.callee_path.ends_with(suffix)) return &m;
  return nullptr;
}

const InstrumentationPlan* plan_for(const StaticFileResult& r, int node_id) {
  for (const auto& p : r.plans)
    if (p.target_match.node_id == node_id) return &p;
  return nullptr;
}

}  // namespace

TEST(Matching, UnlockDecryptCall) {
  auto r = analyze("unlock.js", read(fixtures_dir() / "js/unlock.js"));
  ASSERT_TRUE(r.parsed);
  const FunctionMatch* m = find_role(r, "decrypt");
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(m->matched_pattern, ".*AES\\.decrypt");
  EXPECT_EQ(m->callee_path, "CryptoJS.AES.decrypt");
  EXPECT_EQ(m->chain_names(), (std::vector<std::string>{"UnlockExample", "unlock"}));
}

TEST(Matching, DeriveKeyHardcodedParams) {
  auto r = analyze("derive.js", read(fixtures_dir() / "js/derive.js"));
  const FunctionMatch* m = find_callee(r, ".deriveKey");
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(m->chain_names(), (std::vector<std::string>{"a", "anonymous-then-callback"}));
  ASSERT_TRUE(m->iterations_slot.has_value());
  const ConstantValue& it = m->hardcoded_params.at(*m->iterations_slot);
  EXPECT_EQ(it.value, 5000);
  EXPECT_EQ(it.raw, "5e3");
  EXPECT_EQ(m->hardcoded_params.at("hash").value, "SHA-256");
  EXPECT_EQ(m->hardcoded_params.at("name").value, "PBKDF2");
  EXPECT_EQ(m->symbolic_params.at("baseKey"), "e");
}

TEST(Matching, NoCryptoNoMatches) {
  auto r = analyze("plain.js", "function add(a, b) { return a + b; }\nconsole.log(add(1, 2));\n");
  ASSERT_TRUE(r.parsed);
  EXPECT_TRUE(r.matches.empty());
  EXPECT_TRUE(r.traces.empty());
  EXPECT_TRUE(r.plans.empty());
}

TEST(Matching, TopLevelCallHasProgramChain) {
  auto r = analyze("top.js", "CryptoJS.AES.encrypt(\"a\", \"b\");\n");
  ASSERT_EQ(r.matches.size(), 1u);
  EXPECT_EQ(r.matches[0].chain_names(), std::vector<std::string>{"<program>"});
}

TEST(Matching, ConstantPropagatesIntoIterations) {
  auto r = analyze("const.js",
                   "const iters = 100;\n"
                   "crypto.subtle.deriveKey({name: \"PBKDF2\", salt: s, iterations: iters, hash: \"SHA-1\"},"
                   " k, {name: \"AES-CBC\", length: 256}, false, [\"encrypt\"]);\n");
  const FunctionMatch* m = find_role(r, "derive_key");
  ASSERT_NE(m, nullptr);
  const ConstantValue& it = m->hardcoded_params.at("iterations");
  EXPECT_EQ(it.value, 100);
  EXPECT_EQ(it.via, "propagated");
  EXPECT_EQ(m->symbolic_params.at("salt"), "s");
}

TEST(Matching, ForwardSearchIsIdempotent) {
  std::string src = normalize_source(read(fixtures_dir() / "js/derive.js"));
  js::Ast ast = js::parse_script(src, "derive.js");
  ValuableFunctionDb db = default_rules();
  for (const auto& m : match_valuable_functions(ast, db)) {
    EXPECT_EQ(to_json(forward_search(ast, m)), to_json(m));
    EXPECT_EQ(to_json(match_from_json(to_json(m))), to_json(m));
  }
}

TEST(Taint, PhishingHashReachesInnerHtml) {
  auto r = analyze("phishing.js", read(fixtures_dir() / "js/phishing.js"));
  ASSERT_TRUE(r.parsed);
  std::vector<const TaintTrace*> ext;
  for (const auto& t : r.traces)
    if (t.resolved && t.externally_modifiable) ext.push_back(&t);
  ASSERT_EQ(ext.size(), 1u);
  EXPECT_EQ(ext[0]->sink.role, "html_write");
  EXPECT_EQ(ext[0]->step_text.back(), "window.location.hash");
  EXPECT_EQ(ext[0]->steps.size(), ext[0]->step_spans.size());
}

TEST(Taint, StaticLiteralHasNoTraces) {
  auto r = analyze("static.js", "var el = document.getElementById(\"x\");\nel.innerHTML = \"static\";\n");
  ASSERT_EQ(r.matches.size(), 1u);
  EXPECT_TRUE(r.traces.empty());
}

TEST(Taint, ValueFromAnotherScriptIsUnresolved) {
  auto r = analyze("g.js", "document.body.innerHTML = sharedState;\n");
  ASSERT_EQ(r.traces.size(), 1u);
  const TaintTrace& t = r.traces[0];
  EXPECT_FALSE(t.resolved);
  EXPECT_FALSE(t.source.has_value());
  EXPECT_EQ(t.steps.back().transfer, Transfer::CallArg);
  EXPECT_EQ(t.step_text.back(), "sharedState");
}

TEST(Taint, ModuleImportIsReportedUnsupported) {
  auto r = analyze("imp.js", "import {x} from \"./other.js\";\ndocument.body.innerHTML = x;\n");
  EXPECT_FALSE(r.parsed);
  EXPECT_TRUE(r.traces.empty());
}

TEST(Taint, TraceJsonRoundTrip) {
  auto r = analyze("phishing.js", read(fixtures_dir() / "js/phishing.js"));
  for (const auto& t : r.traces) EXPECT_EQ(to_json(trace_from_json(to_json(t))), to_json(t));
}

TEST(Taint, RandomProgramsMatchOracle) {
  auto res = wscan::testing::check_taint_oracle(200, 314159);
  EXPECT_TRUE(res.ok) << res.detail;
}

// Brute force: expand every simple backward path breadth first and keep those that end at
// a source, plus every prefix that reaches an external vertex.
std::set<std::pair<std::vector<TaintStep>, int>> brute_paths(const FlowGraph& g, TaintStep start) {
  std::set<std::pair<std::vector<TaintStep>, int>> out;
  std::vector<std::vector<TaintStep>> frontier{{start}};
  while (!frontier.empty()) {
    std::vector<std::vector<TaintStep>> next;
    for (auto& path : frontier) {
      int v = path.back().node_id;
      if (g.sources.count(v)) {
        out.insert({path, 1});
        continue;
      }
      if (g.external.count(v)) {
        auto p = path;
        p.back().transfer = Transfer::CallArg;
        out.insert({p, 0});
      }
      auto it = g.inputs.find(v);
      if (it == g.inputs.end()) continue;
      for (const auto& e : it->second) {
        bool seen = std::any_of(path.begin(), path.end(), [&](const TaintStep& s) { return s.node_id == e.to; });
        if (seen) continue;
        auto p = path;
        p.push_back({e.to, e.kind});
        next.push_back(std::move(p));
      }
    }
    frontier = std::move(next);
  }
  return out;
}

TEST(Taint, EnumeratePathsMatchesBruteForce) {
  std::mt19937_64 rng(4242);
  static const SourcePattern dummy{};
  for (int round = 0; round < 300; ++round) {
    FlowGraph g;
    int n = 2 + static_cast<int>(rng() % 7);
    for (int v = 0; v < n; ++v) {
      int deg = static_cast<int>(rng() % 3);
      for (int k = 0; k < deg; ++k) {
        g.inputs[v].push_back({static_cast<int>(rng() % n), static_cast<Transfer>(rng() % 5)});
      }
      if (rng() % 5 == 0) g.sources[v] = &dummy;
      else if (rng() % 4 == 0) g.external.insert(v);
    }
    TaintStep start{0, Transfer::Assign};
    bool truncated = true;
    auto got = enumerate_paths(g, start, TaintLimits{}, &truncated);
    EXPECT_FALSE(truncated);
    std::set<std::pair<std::vector<TaintStep>, int>> got_set(got.begin(), got.end());
    EXPECT_EQ(got_set.size(), got.size()) << "duplicate paths in round " << round;
    EXPECT_EQ(got_set, brute_paths(g, start)) << "round " << round;
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
  }
}

TEST(Taint, EnumeratePathsReportsTruncation) {
  // A complete graph has far more simple paths than the limit.
  FlowGraph g;
  static const SourcePattern dummy{};
  for (int v = 0; v < 9; ++v)
    for (int u = 0; u < 9; ++u)
      if (u != v) g.inputs[v].push_back({u, Transfer::Assign});
  g.external.insert(8);
  bool truncated = false;
  auto got = enumerate_paths(g, {0, Transfer::Assign}, TaintLimits{16, 256}, &truncated);
  EXPECT_TRUE(truncated);
  EXPECT_LE(got.size(), 16u);
}

TEST(Planning, UnlockEnvelopeAndBindings) {
  auto r = analyze("unlock.js", read(fixtures_dir() / "js/unlock.js"));
  const FunctionMatch* m = find_role(r, "decrypt");
  ASSERT_NE(m, nullptr);
  const InstrumentationPlan* p = plan_for(r, m->node_id);
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->envelope_name, "unlock");
  EXPECT_FALSE(p->synthetic_envelope);
  EXPECT_EQ(p->captured_bindings, (std::vector<std::string>{"a", "b"}));
  EXPECT_FALSE(p->capture_may_fail);
}

TEST(Planning, LiteralArgumentsCaptureNothing) {
  auto r = analyze("lit.js", "CryptoJS.AES.encrypt(\"a\", \"b\");\n");
  ASSERT_EQ(r.plans.size(), 1u);
  EXPECT_TRUE(r.plans[0].captured_bindings.empty());
  EXPECT_TRUE(r.plans[0].binding_slots.empty());
  EXPECT_TRUE(r.plans[0].synthetic_envelope);
  EXPECT_EQ(r.plans[0].envelope_name, "<program>");
}

TEST(Planning, ClosureCaptureMayFail) {
  auto r = analyze("derive.js", read(fixtures_dir() / "js/derive.js"));
  const FunctionMatch* m = find_callee(r, ".deriveKey");
  ASSERT_NE(m, nullptr);
  const InstrumentationPlan* p = plan_for(r, m->node_id);
  ASSERT_NE(p, nullptr);
  EXPECT_TRUE(p->capture_may_fail);
  EXPECT_EQ(p->binding_slots.at("e"), std::vector<std::string>{"baseKey"});
  EXPECT_EQ(p->binding_slots.at("i"), std::vector<std::string>{"algorithm"});
}

TEST(Planning, PlansAreWellFormed) {
  ValuableFunctionDb db = default_rules();
  for (const char* name : {"js/unlock.js", "js/derive.js", "js/phishing.js"}) {
    std::string src = normalize_source(read(fixtures_dir() / name));
    js::Ast ast = js::parse_script(src, name);
    FileAnalysis fa(ast, db);
    for (const auto& m : match_valuable_functions(ast, db)) {
      if (m.kind != MatchKind::Crypto) continue;
      auto plan = plan_instrumentation(fa, m);
      std::string why;
      EXPECT_TRUE(plan_well_formed(fa, plan, &why)) << name << ": " << why;
    }
  }
}

TEST(Planning, ForeignMatchIsRejected) {
  ValuableFunctionDb db = default_rules();
  js::Ast ast = js::parse_script("var x = 1;\n", "x.js");
  FunctionMatch bogus;
  bogus.node_id = 999;
  EXPECT_THROW(plan_instrumentation(ast, bogus), Error);
  EXPECT_THROW(forward_search(ast, bogus), Error);
}
