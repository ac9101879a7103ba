#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "wscan/error.hpp"
#include "wscan/report.hpp"
#include "wscan/scan.hpp"

namespace fs = std::filesystem;
using namespace wscan;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + out);
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Security scanner for browser crypto-wallet extensions"};
  app.require_subcommand(1);

  std::string ext, mode = "static", rules_path, semantics_path, webdriver_url, profile_dir, report_path;
  std::string format = "json", trace_out, agent_dir, work_dir, trace_path, corpus_dir;
  int per_page = 30, route_timeout = 180, poll_ms = 1000;
  size_t jobs = std::max(1u, std::min(4u, std::thread::hardware_concurrency()));

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--mode", mode, "static or full")->check(CLI::IsMember({"static", "full"}));
    cmd->add_option("--rules", rules_path, "valuable-function database (JSON)");
    cmd->add_option("--semantics", semantics_path, "page-semantics database (JSON)");
    cmd->add_option("--webdriver-url", webdriver_url, "WebDriver endpoint (default: $WR_WEBDRIVER_URL)");
    cmd->add_option("--profile-dir", profile_dir, "browser profile directory");
    cmd->add_option("--agent-dir", agent_dir, "browser agent scripts (default: $WR_AGENT_DIR)");
    cmd->add_option("--work-dir", work_dir, "where instrumented bundles are written");
    cmd->add_option("--page-timeout", per_page, "seconds a page may stay unchanged");
    cmd->add_option("--route-timeout", route_timeout, "seconds per navigation route");
    cmd->add_option("--poll-ms", poll_ms, "runtime poll interval in milliseconds")->check(CLI::Range(250, 60000));
    cmd->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  };

  auto* scan_cmd = app.add_subcommand("scan", "scan one extension");
  scan_cmd->add_option("--ext", ext, "extension directory, .zip or .crx")->required();
  scan_cmd->add_option("--report", report_path, "write the report here instead of stdout");
  scan_cmd->add_option("--trace-out", trace_out, "persist the collected trace (JSON lines)");
  add_common(scan_cmd);

  auto* replay_cmd = app.add_subcommand("replay", "run the detectors over a recorded trace");
  replay_cmd->add_option("--trace", trace_path, "trace file (JSON lines)")->required();
  replay_cmd->add_option("--rules", rules_path, "valuable-function database (JSON)");
  replay_cmd->add_option("--report", report_path, "write the report here instead of stdout");
  replay_cmd->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));

  auto* corpus_cmd = app.add_subcommand("corpus", "scan every extension in a directory");
  corpus_cmd->add_option("--dir", corpus_dir, "directory of extensions, optionally with corpus.json")->required();
  corpus_cmd->add_option("--jobs", jobs, "parallel scans")->check(CLI::PositiveNumber);
  corpus_cmd->add_option("--trace-out", trace_out, "directory for per-extension traces");
  add_common(corpus_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    ScanOptions opt;
    if (!rules_path.empty()) opt.rules = load_rules(slurp(rules_path));
    ReportFormat fmt = format == "text" ? ReportFormat::Text : ReportFormat::Json;

    if (*replay_cmd) {
      Report r = replay(read_trace_file(trace_path), opt.rules);
      emit(render_report(r, fmt), report_path);
      return exit_code(r);
    }

    if (!semantics_path.empty()) opt.semantics = load_semantics_db(slurp(semantics_path));
    opt.mode = mode == "full" ? ScanMode::Full : ScanMode::Static;
    opt.harness.webdriver_url = webdriver_url.empty() ? env_or("WR_WEBDRIVER_URL", "") : webdriver_url;
    opt.harness.browser_profile_dir = profile_dir;
    opt.harness.per_page_timeout_s = per_page;
    opt.harness.route_timeout_s = route_timeout;
    opt.harness.poll_interval_ms = poll_ms;
    opt.harness.validate();
    std::string agents = agent_dir.empty() ? env_or("WR_AGENT_DIR", "") : agent_dir;
    if (!agents.empty()) opt.agent_dir = agents;
    if (!work_dir.empty()) opt.work_dir = work_dir;
    if (!trace_out.empty()) opt.trace_out = trace_out;
    if (opt.mode == ScanMode::Full && opt.harness.webdriver_url.empty()) {
      throw Error(ErrorCode::kWebDriverUnreachable, "full mode needs --webdriver-url or WR_WEBDRIVER_URL");
    }

    if (*scan_cmd) {
      Report r = scan(ext, opt);
      emit(render_report(r, fmt), report_path);
      return exit_code(r);
    }

    if (opt.trace_out) fs::create_directories(*opt.trace_out);
    auto entries = run_corpus(corpus_dir, opt, jobs);
    bool any_findings = false, mismatch = false;
    for (const auto& e : entries) {
      std::cout << e.name << ": ";
      if (!e.report) {
        std::cout << "error: " << e.error << "\n";
        mismatch |= e.expected.has_value();
        continue;
      }
      any_findings |= !e.report->findings.empty();
      std::cout << e.report->findings.size() << " findings";
      for (const auto& f : e.report->findings) std::cout << " " << category_name(f.category);
      if (e.expected) {
        std::cout << (e.matches_expected ? " (matches ground truth)" : " (DIFFERS from ground truth)");
        mismatch |= !e.matches_expected;
      }
      std::cout << "\n";
    }
    if (mismatch) return 2;
    return any_findings ? 1 : 0;
  } catch (const Error& e) {
    std::cerr << "wscan: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "wscan: " << e.what() << "\n";
    return 2;
  }
}
