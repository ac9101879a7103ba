#include <fstream>
#include <unistd.h>

#include <gtest/gtest.h>

#include "support/checks.hpp"
#include "wscan/error.hpp"
#include "wscan/report.hpp"
#include "wscan/scan.hpp"

using namespace wscan;
using wscan::testing::fixtures_dir;
namespace fs = std::filesystem;

namespace {

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() / ("wscan-report-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

TraceFile replay_trace() { return read_trace_file(fixtures_dir() / "replay/trace.jsonl"); }

ErrorCode parse_error(const std::string& text) {
  try {
    parse_trace_file(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIo;
}

}  // namespace

TEST(TraceFile, RoundTrip) {
  TraceFile tf = replay_trace();
  ASSERT_FALSE(tf.traces.empty());
  std::string once = serialize_trace_file(tf);
  std::string twice = serialize_trace_file(parse_trace_file(once));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(once, read(fixtures_dir() / "replay/trace.jsonl"));

  TempDir dir;
  write_trace_file(dir.path / "t.jsonl", tf);
  EXPECT_EQ(read(dir.path / "t.jsonl"), once);
}

TEST(TraceFile, FormatErrors) {
  std::string good = read(fixtures_dir() / "replay/trace.jsonl");
  EXPECT_EQ(parse_error(""), ErrorCode::kTraceFormat);
  EXPECT_EQ(parse_error("not json\n"), ErrorCode::kTraceFormat);
  EXPECT_EQ(parse_error(good.substr(good.find('\n') + 1)), ErrorCode::kTraceFormat);
  EXPECT_EQ(parse_error(good + "{\"record\":\"mystery\"}\n"), ErrorCode::kTraceFormat);
  try {
    read_trace_file("/nonexistent/trace.jsonl");
    FAIL();
  } catch (const Error&) {
  }
}

TEST(TraceFile, EventJsonRoundTrip) {
  for (const auto& t : replay_trace().traces) {
    for (const auto& e : t.events) EXPECT_EQ(to_json(event_from_json(to_json(e))), to_json(e));
    if (t.password_probe) EXPECT_EQ(to_json(probe_from_json(to_json(*t.password_probe))), to_json(*t.password_probe));
    EXPECT_EQ(to_json(corpus_from_json(to_json(t.sensitive_corpus))), to_json(t.sensitive_corpus));
  }
}

TEST(Report, EmptyReport) {
  Report r;
  r.target_path = "x";
  auto j = report_json(r);
  ASSERT_TRUE(j.contains("findings"));
  EXPECT_TRUE(j["findings"].is_array());
  EXPECT_TRUE(j["findings"].empty());
  EXPECT_NE(render_report(r, ReportFormat::Json).find("\"findings\": []"), std::string::npos);
  EXPECT_EQ(exit_code(r), 0);
}

TEST(Report, ReplayIsByteIdentical) {
  TraceFile tf = replay_trace();
  auto words = bip39_wordlist();
  Report a = build_report(tf, ScanMode::Full, default_rules(), words);
  Report b = replay(tf, default_rules());
  EXPECT_EQ(render_report(a, ReportFormat::Json), render_report(b, ReportFormat::Json));
  EXPECT_EQ(render_report(a, ReportFormat::Text), render_report(b, ReportFormat::Text));
  EXPECT_EQ(exit_code(a), 1);
  auto res = wscan::testing::check_replay_golden();
  EXPECT_TRUE(res.ok) << res.detail;
}

TEST(Report, TextNamesCategorySeverityAndLocation) {
  Report r = replay(replay_trace(), default_rules());
  std::string text = render_report(r, ReportFormat::Text);
  EXPECT_NE(text.find("[defective_cryptography] derive.js:6"), std::string::npos) << text;
  EXPECT_NE(text.find("CRITICAL"), std::string::npos);
  EXPECT_NE(text.find("MEDIUM"), std::string::npos);
}

TEST(Report, FindingsCarryEvidence) {
  Report r = replay(replay_trace(), default_rules());
  auto j = report_json(r);
  for (const auto& f : j["findings"]) {
    EXPECT_FALSE(f["evidence"].empty()) << f.dump();
    EXPECT_TRUE(f.contains("category") && f.contains("severity"));
  }
}

TEST(StaticScan, CleanFixture) {
  ScanOptions opt;
  Report r = scan(fixtures_dir() / "static/xss-neg-constant-html", opt);
  EXPECT_TRUE(r.findings.empty());
  EXPECT_GE(r.stats.files_parsed, 1);
  EXPECT_EQ(r.mode, ScanMode::Static);
  EXPECT_EQ(exit_code(r), 0);
}

TEST(StaticScan, CompositeFixture) {
  ScanOptions opt;
  Report r = scan(fixtures_dir() / "static/composite-war-xss", opt);
  ASSERT_EQ(r.findings.size(), 2u);
  EXPECT_EQ(r.findings[0].category, Category::Xss);
  EXPECT_EQ(r.findings[1].category, Category::Clickjacking);
  EXPECT_EQ(exit_code(r), 1);
}

TEST(StaticScan, TraceOutReplaysIdentically) {
  TempDir dir;
  ScanOptions opt;
  opt.trace_out = dir.path / "trace.jsonl";
  Report r = scan(fixtures_dir() / "static/crypto-weak-pbkdf2", opt);
  Report again = replay(read_trace_file(*opt.trace_out), default_rules());
  EXPECT_EQ(render_report(r, ReportFormat::Json), render_report(again, ReportFormat::Json));
}

TEST(StaticFixtures, PrecisionAndRecall) {
  auto res = wscan::testing::check_static_fixtures();
  EXPECT_TRUE(res.ok) << res.detail;
}

TEST(Corpus, ManifestAgainstGroundTruth) {
  TempDir dir;
  for (const char* name : {"xss-hash-to-innerhtml", "crypto-neg-strong-pbkdf2", "clickjacking-war-pages"}) {
    fs::copy(fixtures_dir() / "static" / name, dir.path / name, fs::copy_options::recursive);
  }
  nlohmann::json manifest = {
      {"fixtures",
       {{{"name", "xss"}, {"path", "xss-hash-to-innerhtml"}, {"seeded_vulns", {"xss"}}},
        {{"name", "strong"}, {"path", "crypto-neg-strong-pbkdf2"}, {"seeded_vulns", nlohmann::json::array()}},
        {{"name", "war"}, {"path", "clickjacking-war-pages"}, {"seeded_vulns", {"clickjacking", "demonic"}}}}}};
  std::ofstream(dir.path / "corpus.json") << manifest.dump(2);
  auto entries = run_corpus(dir.path, ScanOptions{}, 2);
  ASSERT_EQ(entries.size(), 3u);
  for (const auto& e : entries) {
    ASSERT_TRUE(e.report.has_value()) << e.name << ": " << e.error;
    EXPECT_TRUE(e.matches_expected) << e.name;
  }
  // Runtime-only categories are dropped from the ground truth of a static run.
  EXPECT_EQ(*entries[2].expected, std::vector<std::string>{"clickjacking"});
}

TEST(Corpus, DirectoryWithoutManifest) {
  TempDir dir;
  fs::copy(fixtures_dir() / "static/crypto-cbc-mode", dir.path / "b", fs::copy_options::recursive);
  fs::copy(fixtures_dir() / "static/xss-neg-pathname", dir.path / "a", fs::copy_options::recursive);
  auto entries = run_corpus(dir.path, ScanOptions{}, 4);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].name, "a");
  EXPECT_FALSE(entries[0].expected.has_value());
  EXPECT_EQ(entries[1].report->findings.size(), 1u);
}

TEST(Corpus, EmptyDirectory) {
  TempDir dir;
  try {
    run_corpus(dir.path, ScanOptions{}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCorpus);
  }
}
