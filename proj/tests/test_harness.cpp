#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>

#include "support/checks.hpp"
#include "support/fake_browser.hpp"
#include "wscan/detectors.hpp"
#include "wscan/encoding.hpp"
#include "wscan/error.hpp"
#include "wscan/harness.hpp"
#include "wscan/scan.hpp"

namespace fs = std::filesystem;
using namespace wscan;
using wscan::testing::FakeBrowser;
using wscan::testing::FakeWalletOptions;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("wscan-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

HarnessConfig fast_config(const std::string& url) {
  HarnessConfig cfg;
  cfg.webdriver_url = url;
  cfg.per_page_timeout_s = 5;
  cfg.route_timeout_s = 30;
  cfg.poll_interval_ms = 250;
  cfg.probe_wait_ms = 300;
  cfg.settle_ms = 5;
  cfg.connect_timeout_ms = 1000;
  return cfg;
}

struct Rig {
  TempDir dir;
  FakeBrowser browser;
  HarnessConfig cfg;
  InstrumentedBundle bundle;
  SemanticsDb db = default_semantics();
  std::vector<PlanSummary> plans;
  std::vector<std::string> words = bip39_wordlist();

  explicit Rig(FakeWalletOptions o = {}) : browser(std::move(o)), cfg(fast_config(browser.url())) {
    bundle.out_path = dir.path / "bundle";
    fs::create_directories(bundle.out_path);
    fs::create_directories(dir.path / "profile");
  }

  std::unique_ptr<Session> open() { return Session::open(cfg, bundle, "popup.html", dir.path / "profile"); }

  RuntimeTrace run(RouteId route) {
    auto s = open();
    RouteRunner runner(*s, route, db, cfg, plans, words);
    return runner.run();
  }
};

size_t count(const RuntimeTrace& t, EventKind k) {
  return static_cast<size_t>(std::count_if(t.events.begin(), t.events.end(), [&](const RuntimeEvent& e) { return e.kind == k; }));
}

bool is_subsequence(const std::vector<std::string>& want, const std::vector<std::string>& got) {
  size_t i = 0;
  for (const auto& g : got) {
    if (i < want.size() && g == want[i]) ++i;
  }
  return i == want.size();
}

bool mixed_8(const std::string& p) {
  bool alpha = std::any_of(p.begin(), p.end(), ::isalpha), digit = std::any_of(p.begin(), p.end(), ::isdigit);
  return p.size() >= 8 && alpha && digit;
}

}  // namespace

TEST(HarnessConfig, RejectsBadValues) {
  HarnessConfig c;
  EXPECT_NO_THROW(c.validate());
  c.poll_interval_ms = 100;
  EXPECT_THROW(c.validate(), Error);
  c = HarnessConfig{};
  c.mnemonic_words.pop_back();
  EXPECT_THROW(c.validate(), Error);
  c = HarnessConfig{};
  c.password_ladder.clear();
  EXPECT_THROW(c.validate(), Error);
}

TEST(Session, DeadEndpointIsUnreachableWithinConnectTimeout) {
  HarnessConfig cfg = fast_config("http://127.0.0.1:1");
  InstrumentedBundle b;
  b.out_path = fs::temp_directory_path();
  auto start = std::chrono::steady_clock::now();
  try {
    Session::open(cfg, b, "popup.html", fs::temp_directory_path());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWebDriverUnreachable);
  }
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
}

TEST(Session, OpensExtensionPageWithUnpackedId) {
  Rig rig;
  auto s = rig.open();
  EXPECT_EQ(s->extension_id().size(), 32u);
  EXPECT_EQ(s->extension_id(), unpacked_extension_id(rig.bundle.out_path));
  EXPECT_EQ(s->start_url(), "chrome-extension://" + s->extension_id() + "/popup.html");
  auto caps = rig.browser.last_capabilities();
  auto args = caps["alwaysMatch"]["goog:chromeOptions"]["args"];
  std::string load = "--load-extension=" + fs::absolute(rig.bundle.out_path).lexically_normal().string();
  EXPECT_NE(std::find(args.begin(), args.end(), load), args.end());
}

TEST(Session, BrokenExtensionPageIsExtensionLoadFailed) {
  FakeWalletOptions o;
  o.load_error = true;
  Rig rig(o);
  try {
    rig.open();
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kExtensionLoadFailed);
    EXPECT_NE(std::string(e.what()).find("ERR_BLOCKED_BY_CLIENT"), std::string::npos);
  }
}

TEST(Route, CreateRouteEndsOnMnemonicDisplayWithPhraseCaptured) {
  Rig rig;
  RuntimeTrace t = rig.run(RouteId::Create);
  ASSERT_TRUE(t.completed) << t.failure_reason.value_or("");
  EXPECT_EQ(t.pages_visited, expected_sequence(RouteId::Create));
  EXPECT_EQ(t.sensitive_corpus.mnemonic_words.size(), 12u);
  EXPECT_EQ(t.sensitive_corpus.mnemonic_words.back(), "about");
  ASSERT_TRUE(t.password_probe);
  EXPECT_EQ(t.password_probe->weakest_accepted, "123");
  EXPECT_EQ(t.sensitive_corpus.password_used, "123");
  EXPECT_GE(count(t, EventKind::StorageSnapshot), 1u);
  for (size_t i = 1; i < t.events.size(); ++i) EXPECT_LE(t.events[i - 1].timestamp, t.events[i].timestamp);
}

TEST(Route, ImportRouteReachesBackupPage) {
  Rig rig;
  RuntimeTrace t = rig.run(RouteId::Import);
  ASSERT_TRUE(t.completed) << t.failure_reason.value_or("");
  EXPECT_TRUE(is_subsequence(expected_sequence(RouteId::Import), t.pages_visited));
  EXPECT_EQ(t.pages_visited.back(), "wallet_backup");
  EXPECT_GE(count(t, EventKind::StorageSnapshot), 1u);
  EXPECT_EQ(t.sensitive_corpus.mnemonic_words, kTestMnemonic);
  ASSERT_TRUE(t.password_probe);
  EXPECT_FALSE(t.password_probe->inconclusive);
  EXPECT_EQ(t.password_probe->weakest_accepted, "123");
  EXPECT_EQ(rig.browser.wallet_password(), "123");
  // Twelve boxes filled in order.
  size_t typed = 0;
  for (const auto& e : t.events) {
    if (e.kind == EventKind::ActionLog && e.payload.value("kind", "") == "mnemonic") typed = e.payload.value("boxes", 0);
  }
  EXPECT_EQ(typed, 12u);
}

TEST(Route, StorageSnapshotsDifferFromPredecessor) {
  Rig rig;
  RuntimeTrace t = rig.run(RouteId::Import);
  std::string prev;
  for (const auto& e : t.events) {
    if (e.kind != EventKind::StorageSnapshot) continue;
    EXPECT_NE(e.payload.dump(), prev);
    prev = e.payload.dump();
  }
}

TEST(Mnemonic, ChecksumPicksThePhraseOutOfSurroundingWords) {
  auto words = bip39_wordlist();
  EXPECT_TRUE(mnemonic_checksum_ok(kTestMnemonic, words));
  std::vector<std::string> abandon(11, "abandon");
  abandon.push_back("about");
  EXPECT_TRUE(mnemonic_checksum_ok(abandon, words));
  abandon.back() = "abandon";
  EXPECT_FALSE(mnemonic_checksum_ok(abandon, words));
  std::vector<std::string> run = {"keep", "safe"};
  run.insert(run.end(), kTestMnemonic.begin(), kTestMnemonic.end());
  run.push_back("copy");
  EXPECT_EQ(select_mnemonic(run, words), kTestMnemonic);
}

TEST(Probe, AcceptsAnythingGivesWeakest) {
  Rig rig;
  RuntimeTrace t = rig.run(RouteId::Create);
  ASSERT_TRUE(t.password_probe);
  ASSERT_EQ(t.password_probe->attempts.size(), 1u);
  EXPECT_EQ(t.password_probe->attempts[0].signal, "navigation");
}

TEST(Probe, EightMixedCharactersRule) {
  FakeWalletOptions o;
  o.accepts = mixed_8;
  Rig rig(o);
  RuntimeTrace t = rig.run(RouteId::Create);
  ASSERT_TRUE(t.password_probe);
  // Oracle: the first ladder entry the fixture's rule accepts.
  auto ladder = rig.cfg.password_ladder;
  auto first = *std::find_if(ladder.begin(), ladder.end(), mixed_8);
  EXPECT_EQ(t.password_probe->weakest_accepted, first);
  for (const auto& a : t.password_probe->attempts) {
    if (!a.accepted) EXPECT_EQ(a.signal, "error_text");
  }
  EXPECT_TRUE(detect_password_policy(t.password_probe, default_rules()).findings.empty());
  EXPECT_TRUE(t.completed);
}

TEST(Probe, SixDigitMinimum) {
  FakeWalletOptions o;
  o.accepts = [](const std::string& p) { return p.size() >= 6; };
  Rig rig(o);
  RuntimeTrace t = rig.run(RouteId::Create);
  ASSERT_TRUE(t.password_probe);
  EXPECT_EQ(t.password_probe->weakest_accepted, "123456");
  EXPECT_EQ(detect_password_policy(t.password_probe, default_rules()).findings.size(), 1u);
}

TEST(Probe, DisabledSubmitCountsAsRejection) {
  FakeWalletOptions o;
  o.accepts = mixed_8;
  o.disable_submit = true;
  Rig rig(o);
  RuntimeTrace t = rig.run(RouteId::Create);
  ASSERT_TRUE(t.password_probe);
  EXPECT_EQ(t.password_probe->weakest_accepted, "abc12345");
  EXPECT_EQ(t.password_probe->attempts.front().signal, "submit_disabled");
  EXPECT_TRUE(t.completed);
}

TEST(Monitor, IdlePageSecondPollIsEmpty) {
  Rig rig;
  auto s = rig.open();
  RuntimeTrace t;
  RuntimeMonitor m(*s, t);
  EXPECT_GE(m.poll(), 2u);  // storage and html
  EXPECT_EQ(m.poll(), 0u);
  ASSERT_EQ(t.events.size(), 2u);
  EXPECT_EQ(t.events[0].payload["localStorage"], nlohmann::json::object());
  EXPECT_FALSE(t.events[1].payload.value("html", "").empty());
}

TEST(Monitor, MissingAgentFallsBackToPageSource) {
  FakeWalletOptions o;
  o.agent = false;
  Rig rig(o);
  auto s = rig.open();
  RuntimeTrace t;
  RuntimeMonitor m(*s, t);
  m.poll();
  ASSERT_EQ(count(t, EventKind::HtmlSnapshot), 1u);
  EXPECT_EQ(count(t, EventKind::StorageSnapshot), 0u);
  EXPECT_EQ(t.events.front().payload.value("action", ""), "agent_absent");
}

TEST(Monitor, DrainedCapturesBecomeEvents) {
  Rig rig;
  RuntimeTrace t = rig.run(RouteId::Create);
  ASSERT_EQ(count(t, EventKind::ParamCapture), 1u);
  for (const auto& e : t.events) {
    if (e.kind == EventKind::ParamCapture) {
      EXPECT_EQ(e.payload["plan_id"], "kdf.js#10");
      EXPECT_EQ(e.payload["bindings"]["password"], "123");
    }
  }
}

TEST(Monitor, CachedTextareaPhraseShowsUpInProfileScan) {
  FakeWalletOptions o;
  o.textarea_mnemonic = true;
  o.leak_to_profile = true;
  Rig rig(o);
  RuntimeTrace t = rig.run(RouteId::Create);
  ASSERT_TRUE(t.completed);
  ASSERT_EQ(count(t, EventKind::ProfileScan), 1u);
  for (const auto& e : t.events) {
    if (e.kind != EventKind::ProfileScan) continue;
    const auto& f = e.payload["files"][0];
    EXPECT_EQ(f["path"], "Default/Sessions/Session_1");
    EXPECT_EQ(f["needle_kind"], "mnemonic");
    EXPECT_EQ(f["encoding"], "utf16");
  }
  // The detector sees the same trace as a demonic finding.
  Detection d = detect_demonic(t, rig.words, default_rules());
  ASSERT_EQ(d.findings.size(), 1u);
  EXPECT_EQ(d.findings[0].category, Category::Demonic);
}

TEST(FullScan, DynamicPhaseFindsSeededIssues) {
  FakeWalletOptions o;
  // Six characters at least, so the stored password is long enough to be searched for.
  o.accepts = [](const std::string& p) { return p.size() >= 6; };
  o.textarea_mnemonic = true;
  o.leak_to_profile = true;
  FakeBrowser browser(o);
  TempDir work;
  fs::create_directories(work.path / "agent");
  std::ofstream(work.path / "agent" / "agent.js") << "var __wr_buf = [];\n";
  ScanOptions opt;
  opt.mode = ScanMode::Full;
  opt.harness = fast_config(browser.url());
  opt.agent_dir = work.path / "agent";
  opt.work_dir = work.path / "work";
  opt.trace_out = work.path / "trace.jsonl";
  Report r = scan(wscan::testing::fixtures_dir() / "replay" / "extension", opt);
  std::set<std::string> cats;
  for (const auto& f : r.findings) cats.insert(std::string(category_name(f.category)));
  EXPECT_TRUE(cats.count("demonic"));
  EXPECT_TRUE(cats.count("redundant_storage"));
  EXPECT_TRUE(cats.count("defective_password_policy"));
  EXPECT_TRUE(cats.count("defective_cryptography"));
  EXPECT_EQ(r.stats.routes_run, 2);
  std::string failures;
  for (const auto& n : r.notes) failures += n.kind + ": " + n.message + "\n";
  EXPECT_EQ(r.stats.routes_completed, 2) << failures;
  // The persisted trace replays to the same findings.
  Report again = replay(read_trace_file(*opt.trace_out), default_rules());
  EXPECT_EQ(render_report(again, ReportFormat::Json), render_report(r, ReportFormat::Json));
}

TEST(FullScan, MissingAgentsIsANoteNotACrash) {
  FakeBrowser browser;
  ScanOptions opt;
  opt.mode = ScanMode::Full;
  opt.harness = fast_config(browser.url());
  Report r = scan(wscan::testing::fixtures_dir() / "replay" / "extension", opt);
  bool noted = std::any_of(r.notes.begin(), r.notes.end(), [](const Note& n) { return n.kind == "dynamic_phase_failed"; });
  EXPECT_TRUE(noted);
}
