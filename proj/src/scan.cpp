#include "wscan/scan.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "wscan/detectors.hpp"
#include "wscan/error.hpp"
#include "wscan/instrumenter.hpp"
#include "wscan/static_analyzer.hpp"

namespace wscan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kStaticCategories = {"clickjacking", "xss", "defective_cryptography"};

fs::path fresh_dir(const fs::path& parent, const std::string& stem) {
  std::random_device rd;
  for (int i = 0; i < 100; ++i) {
    fs::path p = parent / (stem + "-" + std::to_string(rd() % 1000000));
    if (fs::create_directories(p)) return p;
  }
  throw Error(ErrorCode::kIo, "cannot create a work directory under " + parent.string());
}

PlanSummary summarize(const InstrumentationPlan& p) {
  return {p.plan_id, p.file, p.target_match.role, p.target_match.callee_path, p.binding_slots};
}

RuntimeTrace failed_trace(RouteId route, const std::string& reason) {
  RuntimeTrace t;
  t.route_id = std::string(route_name(route));
  t.failure_reason = reason;
  return t;
}

void dynamic_phase(const ExtensionPackage& pkg, StaticPhase& phase, const ScanOptions& opt, TraceFile& out) {
  auto& notes = phase.artifacts.notes;
  std::map<std::string, std::vector<InstrumentationPlan>> by_file;
  for (const auto& p : phase.plans) by_file[p.file].push_back(p);
  std::map<std::string, std::string> rewritten;
  for (const auto& [file, plans] : by_file) {
    const ScriptFile* script = pkg.script(file);
    if (!script) continue;
    try {
      InstrumentResult r = apply_instrumentation(*script, plans);
      rewritten[file] = std::move(r.text);
      for (const auto& w : r.warnings) notes.push_back({"instrumentation_warning", file, w});
    } catch (const Error& e) {
      notes.push_back({"instrumentation_skipped", file, e.what()});
    }
  }
  if (!opt.agent_dir) {
    throw Error(ErrorCode::kWriteFailure, "no agent directory configured (use --agent-dir or WR_AGENT_DIR)");
  }
  auto agents = read_agent_dir(*opt.agent_dir);
  fs::path work = opt.work_dir ? *opt.work_dir : fs::temp_directory_path();
  fs::create_directories(work);
  fs::path bundle_dir = fresh_dir(work, "wscan-bundle");
  fs::remove(bundle_dir);
  InstrumentedBundle bundle = package_instrumented(pkg, rewritten, agents, bundle_dir, phase.plans);
  std::string start = start_page(pkg);
  auto wordlist = bip39_wordlist();
  for (RouteId route : {RouteId::Create, RouteId::Import}) {
    fs::path profile = opt.harness.browser_profile_dir.empty()
                           ? fresh_dir(work, "wscan-profile")
                           : opt.harness.browser_profile_dir / std::string(route_name(route));
    fs::create_directories(profile);
    try {
      auto session = Session::open(opt.harness, bundle, start, profile);
      RouteRunner runner(*session, route, opt.semantics, opt.harness, phase.artifacts.plans, wordlist);
      out.traces.push_back(runner.run());
    } catch (const Error& e) {
      out.traces.push_back(failed_trace(route, std::string(error_code_name(e.code())) + ": " + e.what()));
    }
  }
}

}  // namespace

std::string start_page(const ExtensionPackage& pkg) {
  EntryPoints ep = entry_points(pkg);
  if (ep.action_page && pkg.html(*ep.action_page)) return *ep.action_page;
  for (const char* guess : {"popup.html", "home.html", "index.html"}) {
    if (pkg.html(guess)) return guess;
  }
  if (!ep.war_html.empty()) return ep.war_html.front();
  if (!pkg.html_pages.empty()) return pkg.html_pages.front().path;
  throw Error(ErrorCode::kStartPageNotFound, "extension bundles no HTML page to start from");
}

StaticPhase run_static_phase(const ExtensionPackage& pkg, const std::string& target, const ValuableFunctionDb& db,
                             const SemanticsDb& semantics) {
  StaticPhase out;
  StaticArtifacts& a = out.artifacts;
  a.target_path = target;
  a.digest = pkg.digest;
  a.manifest_version = pkg.manifest.version;
  EntryPoints ep = entry_points(pkg);
  a.action_page = ep.action_page;
  a.csp = pkg.manifest.csp;
  a.war_html = ep.war_html;
  for (const auto& page : pkg.html_pages) a.page_classes[page.path] = classify_page(observe_html(page.raw), semantics);
  for (const auto& script : pkg.scripts) {
    ++a.stats.scripts_total;
    if (script.note) {
      ++a.stats.normalization_skipped;
      a.notes.push_back({"normalization_skipped", script.path, *script.note});
    }
    StaticFileResult r = analyze_script(script.path, script.normalized_source, db);
    if (!r.parsed) {
      a.stats.parse_unsupported += r.unsupported;
      a.notes.push_back({r.unsupported ? "parse_unsupported" : "parse_error", script.path, r.parse_note});
      continue;
    }
    ++a.stats.files_parsed;
    for (auto& m : r.matches) {
      if (m.kind == MatchKind::Crypto) a.crypto_matches.push_back(std::move(m));
    }
    for (auto& t : r.traces) a.taint_traces.push_back(std::move(t));
    for (auto& p : r.plans) {
      if (p.capture_may_fail) {
        a.notes.push_back({"capture_may_fail", p.file, p.plan_id + " in " + p.envelope_name});
      }
      a.plans.push_back(summarize(p));
      out.plans.push_back(std::move(p));
    }
  }
  return out;
}

TraceFile collect(const fs::path& ext, const ScanOptions& opt) {
  std::string started = utc_now();
  ExtensionPackage pkg = load_extension(ext);
  StaticPhase phase = run_static_phase(pkg, ext.string(), opt.rules, opt.semantics);
  phase.artifacts.started_at = started;
  TraceFile out;
  if (opt.mode == ScanMode::Full) {
    try {
      dynamic_phase(pkg, phase, opt, out);
    } catch (const Error& e) {
      phase.artifacts.notes.push_back(
          {"dynamic_phase_failed", "", std::string(error_code_name(e.code())) + ": " + e.what()});
    }
  }
  out.scan = std::move(phase.artifacts);
  out.finished_at = utc_now();
  if (opt.trace_out) {
    try {
      write_trace_file(*opt.trace_out, out);
    } catch (const Error& e) {
      out.scan.notes.push_back({"trace_not_written", opt.trace_out->string(), e.what()});
    }
  }
  return out;
}

Report replay(const TraceFile& trace, const ValuableFunctionDb& db) {
  ScanMode mode = trace.traces.empty() ? ScanMode::Static : ScanMode::Full;
  return build_report(trace, mode, db, bip39_wordlist());
}

Report scan(const fs::path& ext, const ScanOptions& opt) {
  TraceFile collected = collect(ext, opt);
  // Detection always consumes the serialized form, so a scan and a replay of its trace agree.
  TraceFile persisted = parse_trace_file(serialize_trace_file(collected));
  Report r = build_report(persisted, opt.mode, opt.rules, bip39_wordlist());
  return r;
}

std::vector<CorpusEntry> run_corpus(const fs::path& dir, const ScanOptions& opt, size_t workers) {
  std::vector<CorpusEntry> entries;
  fs::path manifest = dir / "corpus.json";
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kInvalidJson, "corpus.json: " + std::string(e.what()));
    }
    for (const auto& f : j.at("fixtures")) {
      CorpusEntry e;
      e.name = f.at("name").get<std::string>();
      e.path = dir / f.at("path").get<std::string>();
      std::vector<std::string> seeded = f.value("seeded_vulns", std::vector<std::string>{});
      if (opt.mode == ScanMode::Static) {
        std::erase_if(seeded, [](const std::string& c) { return !kStaticCategories.count(c); });
      }
      std::sort(seeded.begin(), seeded.end());
      e.expected = seeded;
      entries.push_back(std::move(e));
    }
  } else {
    for (const auto& child : fs::directory_iterator(dir)) {
      auto ext = child.path().extension();
      if ((child.is_directory() && fs::exists(child.path() / "manifest.json")) || ext == ".zip" || ext == ".crx") {
        entries.push_back({child.path().filename().string(), child.path(), std::nullopt, "", std::nullopt, true});
      }
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  }
  if (entries.empty()) throw Error(ErrorCode::kEmptyCorpus, "no extensions under " + dir.string());

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < entries.size(); i = next++) {
      CorpusEntry& e = entries[i];
      ScanOptions local = opt;
      if (opt.trace_out) local.trace_out = *opt.trace_out / (e.name + ".jsonl");
      try {
        e.report = scan(e.path, local);
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
      if (e.expected) {
        std::set<std::string> found;
        if (e.report) {
          for (const auto& f : e.report->findings) found.insert(std::string(category_name(f.category)));
        }
        e.matches_expected = e.report && std::vector<std::string>(found.begin(), found.end()) == *e.expected;
      }
    }
  };
  size_t n = std::max<size_t>(1, std::min(workers, entries.size()));
  std::vector<std::thread> pool;
  for (size_t k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return entries;
}

}  // namespace wscan
