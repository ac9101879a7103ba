#include <algorithm>

#include <gtest/gtest.h>

#include "support/checks.hpp"
#include "wscan/detectors.hpp"
#include "wscan/encoding.hpp"
#include "wscan/scan.hpp"

using namespace wscan;
using wscan::testing::fixtures_dir;
using nlohmann::json;

namespace {

StaticArtifacts static_fixture(const std::string& name) {
  ExtensionPackage pkg = load_extension(fixtures_dir() / "static" / name);
  return run_static_phase(pkg, name, default_rules(), default_semantics()).artifacts;
}

const Finding* find(const Detection& d, const std::string& file) {
  for (const auto& f : d.findings)
    if (f.file == file) return &f;
  return nullptr;
}

bool has_note(const Detection& d, const std::string& kind) {
  return std::any_of(d.notes.begin(), d.notes.end(), [&](const Note& n) { return n.kind == kind; });
}

RuntimeEvent event(int id, EventKind kind, json payload) {
  RuntimeEvent e;
  e.id = id;
  e.kind = kind;
  e.payload = std::move(payload);
  return e;
}

const std::string kPhrase =
    "abandon abandon abandon abandon abandon abandon abandon abandon abandon abandon abandon about";

std::vector<FunctionMatch> kdf_matches(const std::string& iterations) {
  std::string src = "function d(k, s) {\n  return crypto.subtle.deriveKey({name: \"PBKDF2\", salt: s, iterations: " +
                    iterations + ", hash: \"SHA-256\"}, k, {name: \"AES-GCM\", length: 256}, false, [\"encrypt\"]);\n}\n";
  return analyze_script("kdf.js", src, default_rules()).matches;
}

}  // namespace

TEST(Clickjacking, WarPagesBySensitivity) {
  auto d = detect_clickjacking(static_fixture("clickjacking-war-pages"), default_rules());
  ASSERT_EQ(d.findings.size(), 2u);
  ASSERT_NE(find(d, "wallet.html"), nullptr);
  EXPECT_EQ(find(d, "wallet.html")->severity, Severity::High);
  ASSERT_NE(find(d, "phishing.html"), nullptr);
  EXPECT_EQ(find(d, "phishing.html")->severity, Severity::Medium);
  for (const auto& f : d.findings) EXPECT_EQ(f.category, Category::Clickjacking);
}

TEST(Clickjacking, ImageOnlyWarIsClean) {
  EXPECT_TRUE(detect_clickjacking(static_fixture("clickjacking-neg-image-only"), default_rules()).findings.empty());
  EXPECT_TRUE(detect_clickjacking(static_fixture("clickjacking-neg-no-war"), default_rules()).findings.empty());
}

TEST(Xss, HashToInnerHtmlIsHigh) {
  auto a = static_fixture("xss-hash-to-innerhtml");
  auto d = detect_xss(a.taint_traces, std::nullopt, default_rules());
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].severity, Severity::High);
  EXPECT_EQ(d.findings[0].file, "phishing.js");
  int steps = std::count_if(d.findings[0].evidence.begin(), d.findings[0].evidence.end(),
                            [](const EvidenceRef& e) { return e.kind == "taint_step"; });
  EXPECT_GE(steps, 2);
}

TEST(Xss, RestrictiveCspLowersSeverity) {
  auto a = static_fixture("xss-hash-to-innerhtml");
  auto d = detect_xss(a.taint_traces, std::string("script-src 'self'; object-src 'self'"), default_rules());
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].severity, Severity::Medium);
  d = detect_xss(a.taint_traces, std::string("script-src 'self' 'unsafe-inline'"), default_rules());
  EXPECT_EQ(d.findings[0].severity, Severity::High);
}

TEST(Xss, UnresolvedTraceBecomesNote) {
  auto r = analyze_script("g.js", "document.body.innerHTML = sharedState;\n", default_rules());
  auto d = detect_xss(r.traces, std::nullopt, default_rules());
  EXPECT_TRUE(d.findings.empty());
  EXPECT_TRUE(has_note(d, "unresolved_trace"));
}

TEST(Xss, NegativeFixturesAreClean) {
  for (const char* name : {"xss-neg-constant-html", "xss-neg-pathname"}) {
    auto a = static_fixture(name);
    EXPECT_TRUE(detect_xss(a.taint_traces, a.csp, default_rules()).findings.empty()) << name;
  }
}

TEST(Csp, RestrictsScripts) {
  EXPECT_TRUE(csp_restricts_scripts("script-src 'self'"));
  EXPECT_TRUE(csp_restricts_scripts("default-src 'self'"));
  EXPECT_FALSE(csp_restricts_scripts("default-src 'self'; script-src *"));
  EXPECT_FALSE(csp_restricts_scripts("script-src 'self' 'unsafe-eval'"));
  EXPECT_FALSE(csp_restricts_scripts("img-src 'self'"));
  EXPECT_FALSE(csp_restricts_scripts(""));
}

TEST(PasswordPolicy, Examples) {
  Thresholds t;
  EXPECT_TRUE(password_defective("123", t));
  EXPECT_TRUE(password_defective("123456", t));
  EXPECT_TRUE(password_defective("abc", t));
  EXPECT_FALSE(password_defective("abc12345", t));
  EXPECT_FALSE(password_defective("1234567", t));
  EXPECT_FALSE(password_defective("1234567a", t));
}

TEST(PasswordPolicy, ProbeOutcomes) {
  ValuableFunctionDb db = default_rules();
  EXPECT_TRUE(detect_password_policy(std::nullopt, db).findings.empty());

  PasswordProbeResult weak;
  weak.attempts = {{"123", false, "error_text"}, {"123456", true, "navigation"}};
  weak.weakest_accepted = "123456";
  auto d = detect_password_policy(weak, db);
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].severity, Severity::Medium);
  EXPECT_EQ(d.findings[0].evidence.size(), 2u);

  PasswordProbeResult strong;
  strong.weakest_accepted = "abc12345";
  EXPECT_TRUE(detect_password_policy(strong, db).findings.empty());

  PasswordProbeResult unknown;
  unknown.inconclusive = true;
  d = detect_password_policy(unknown, db);
  EXPECT_TRUE(d.findings.empty());
  EXPECT_TRUE(has_note(d, "probe_inconclusive"));
}

TEST(RedundantStorage, PlaintextPasswordIsCritical) {
  RuntimeTrace t;
  t.route_id = "create";
  t.sensitive_corpus.password_used = "pass1234";
  t.events.push_back(event(1, EventKind::StorageSnapshot, {{"localStorage", {{"vault", "{\"pw\":\"pass1234\"}"}}}}));
  auto d = detect_redundant_storage(t, {}, default_rules());
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].severity, Severity::Critical);
  EXPECT_EQ(d.findings[0].file, "localStorage:vault");
  ASSERT_TRUE(d.findings[0].evidence[0].match.has_value());
  EXPECT_EQ(d.findings[0].evidence[0].match->normalization, Normalization::Raw);
}

TEST(RedundantStorage, Base64HashIsHigh) {
  RuntimeTrace t;
  t.route_id = "create";
  t.sensitive_corpus.password_used = "pass1234";
  std::string hex = encoding::sha256_hex("pass1234");
  std::string raw;
  for (size_t i = 0; i < hex.size(); i += 2) raw += static_cast<char>(std::stoi(hex.substr(i, 2), nullptr, 16));
  std::string b64 = wscan::testing::oracle_base64_unpadded(raw);
  t.events.push_back(event(1, EventKind::StorageSnapshot, {{"sessionStorage", {{"h", b64 + "="}}}}));
  auto d = detect_redundant_storage(t, {}, default_rules());
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].severity, Severity::High);
}

TEST(RedundantStorage, NoOverlapIsClean) {
  RuntimeTrace t;
  t.sensitive_corpus.password_used = "pass1234";
  t.sensitive_corpus.mnemonic_words = {"abandon", "about"};
  t.events.push_back(event(1, EventKind::StorageSnapshot, {{"localStorage", {{"theme", "dark"}}}}));
  EXPECT_TRUE(detect_redundant_storage(t, {}, default_rules()).findings.empty());
}

TEST(RedundantStorage, IntermediateValuesNeedSecretSlots) {
  RuntimeTrace t;
  t.events.push_back(event(1, EventKind::ParamCapture,
                           {{"plan_id", "a.js#1,a.js#2"}, {"bindings", {{"k", "derivedsecret"}, {"n", "12345678"}, {"x", "short"}}}}));
  PlanSummary p;
  p.plan_id = "a.js#2";
  p.binding_slots = {{"k", {"key"}}, {"n", {"key"}}, {"x", {"key"}}};
  EXPECT_EQ(intermediate_values(t, {p}), std::vector<std::string>{"derivedsecret"});
  EXPECT_TRUE(intermediate_values(t, {}).empty());
}

TEST(Demonic, TextareaPhraseCachedInProfile) {
  RuntimeTrace t;
  t.route_id = "create";
  t.events.push_back(event(1, EventKind::HtmlSnapshot,
                           {{"url", "popup.html"}, {"html", "<p>Your phrase</p><textarea>" + kPhrase + "</textarea>"}}));
  t.events.push_back(event(2, EventKind::ProfileScan,
                           {{"files", {{{"path", "Default/Sessions/Session_1"}, {"needle", kPhrase}, {"normalization", "utf16"}}}}}));
  auto d = detect_demonic(t, bip39_wordlist(), default_rules());
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].severity, Severity::Critical);
  EXPECT_EQ(d.findings[0].file, "popup.html");
  EXPECT_EQ(d.findings[0].evidence.size(), 2u);
}

TEST(Demonic, PasswordInputsAreIgnored) {
  RuntimeTrace t;
  t.events.push_back(event(1, EventKind::HtmlSnapshot,
                           {{"html", "<input type=\"password\" value=\"" + kPhrase + "\">"}}));
  t.events.push_back(event(2, EventKind::StorageSnapshot, {{"localStorage", {{"m", kPhrase}}}}));
  EXPECT_TRUE(detect_demonic(t, bip39_wordlist(), default_rules()).findings.empty());
}

TEST(Demonic, HexKeyInDivPersisted) {
  std::string key(64, 'a');
  key.replace(0, 6, "0f1e2d");
  RuntimeTrace t;
  t.events.push_back(event(1, EventKind::HtmlSnapshot, {{"html", "<div>Private key: 0x" + key + "</div>"}}));
  t.events.push_back(event(2, EventKind::StorageSnapshot, {{"localStorage", {{"acct", "{\"k\":\"" + key + "\"}"}}}}));
  auto d = detect_demonic(t, bip39_wordlist(), default_rules());
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_NE(d.findings[0].evidence[0].detail.find("64-hex"), std::string::npos);
}

TEST(Demonic, ShownButNotPersistedIsClean) {
  RuntimeTrace t;
  t.events.push_back(event(1, EventKind::HtmlSnapshot, {{"html", "<div>" + kPhrase + "</div>"}}));
  EXPECT_TRUE(detect_demonic(t, bip39_wordlist(), default_rules()).findings.empty());
}

TEST(Crypto, IterationBoundaries) {
  ValuableFunctionDb db = default_rules();
  auto d = detect_defective_crypto(kdf_matches("5000"), {}, {}, db);
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].severity, Severity::Medium);
  EXPECT_TRUE(detect_defective_crypto(kdf_matches("10000"), {}, {}, db).findings.empty());
  d = detect_defective_crypto(kdf_matches("310000"), {}, {}, db);
  EXPECT_TRUE(d.findings.empty());
  EXPECT_TRUE(has_note(d, "strong_iterations"));
  d = detect_defective_crypto(kdf_matches("n"), {}, {}, db);
  EXPECT_TRUE(has_note(d, "indeterminate_iterations"));
}

TEST(Crypto, RuntimeCaptureResolvesIterations) {
  ValuableFunctionDb db = default_rules();
  auto matches = kdf_matches("n");
  ASSERT_EQ(matches.size(), 1u);
  RuntimeTrace t;
  std::string id = matches[0].file + "#" + std::to_string(matches[0].node_id);
  t.events.push_back(event(3, EventKind::ParamCapture, {{"plan_id", id}, {"bindings", {{"n", 2048}}}}));
  auto d = detect_defective_crypto(matches, {t}, {}, db);
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_NE(d.findings[0].evidence[0].detail.find("runtime capture #3"), std::string::npos);
}

TEST(Crypto, CbcModeFixture) {
  auto a = static_fixture("crypto-cbc-mode");
  auto d = detect_defective_crypto(a.crypto_matches, {}, {}, default_rules());
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].file, "vault.js");
  EXPECT_NE(d.findings[0].description.find("CBC"), std::string::npos);
}

TEST(Crypto, ThresholdsMatchOracle) {
  auto res = wscan::testing::check_thresholds();
  EXPECT_TRUE(res.ok) << res.detail;
}

TEST(SensitiveMatch, Examples) {
  auto m = sensitive_match("pass1234", "{\"pw\":\"pass1234\"}");
  ASSERT_TRUE(m);
  EXPECT_EQ(m->normalization, Normalization::Raw);
  m = sensitive_match("pass1234", "x=cGFzczEyMzQ=");
  ASSERT_TRUE(m);
  EXPECT_EQ(m->normalization, Normalization::Base64);
  EXPECT_FALSE(sensitive_match("xyz", "xyzxyz"));
  m = sensitive_match("pass1234", wscan::testing::oracle_utf16le("..pass1234.."));
  ASSERT_TRUE(m);
  EXPECT_EQ(m->normalization, Normalization::Utf16);
}

TEST(SensitiveMatch, RandomPairsMatchOracle) {
  auto res = wscan::testing::check_sensitive_match_oracle(500, 17);
  EXPECT_TRUE(res.ok) << res.detail;
}

TEST(SensitiveMatch, EncodingsMatchOracles) {
  for (std::string s : {"pass1234", "quote\"back\\slash", "naïve\n\t"}) {
    EXPECT_EQ(encode_needle(s, Normalization::Hex), wscan::testing::oracle_hex(s));
    EXPECT_EQ(encode_needle(s, Normalization::Base64), wscan::testing::oracle_base64_unpadded(s));
    EXPECT_EQ(encode_needle(s, Normalization::JsonEmbedded), wscan::testing::oracle_json_body(s));
    EXPECT_EQ(encode_needle(s, Normalization::Utf16), wscan::testing::oracle_utf16le(s));
  }
}

TEST(RunDetectors, DeterministicAndSorted) {
  TraceFile tf = read_trace_file(fixtures_dir() / "replay/trace.jsonl");
  auto words = bip39_wordlist();
  auto a = run_detectors(tf, default_rules(), words);
  auto b = run_detectors(tf, default_rules(), words);
  ASSERT_EQ(a.findings.size(), b.findings.size());
  for (size_t i = 0; i < a.findings.size(); ++i) EXPECT_EQ(to_json(a.findings[i]), to_json(b.findings[i]));
  for (size_t i = 1; i < a.findings.size(); ++i) EXPECT_GE(a.findings[i - 1].severity, a.findings[i].severity);
}
