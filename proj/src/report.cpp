#include "wscan/report.hpp"

#include <sstream>

namespace wscan {

using nlohmann::ordered_json;

std::string_view mode_name(ScanMode m) { return m == ScanMode::Full ? "full" : "static"; }

Report build_report(const TraceFile& trace, ScanMode mode, const ValuableFunctionDb& db,
                    const std::vector<std::string>& wordlist) {
  Report r;
  const StaticArtifacts& s = trace.scan;
  r.target_path = s.target_path;
  r.digest = s.digest;
  r.mode = mode;
  r.started_at = s.started_at;
  r.finished_at = trace.finished_at;
  r.rules_version = db.version;
  Detection d = run_detectors(trace, db, wordlist);
  r.findings = std::move(d.findings);
  r.notes = std::move(d.notes);
  r.stats.scripts_total = s.stats.scripts_total;
  r.stats.files_parsed = s.stats.files_parsed;
  r.stats.parse_unsupported = s.stats.parse_unsupported;
  r.stats.normalization_skipped = s.stats.normalization_skipped;
  for (const auto& t : trace.traces) {
    ++r.stats.routes_run;
    r.stats.routes_completed += t.completed;
    r.stats.pages_visited += static_cast<int>(t.pages_visited.size());
    r.stats.events_collected += static_cast<int>(t.events.size());
  }
  return r;
}

ordered_json report_json(const Report& r) {
  ordered_json summary;
  for (Severity s : {Severity::Critical, Severity::High, Severity::Medium, Severity::Low}) {
    summary[std::string(severity_name(s))] = 0;
  }
  ordered_json findings = ordered_json::array();
  for (const auto& f : r.findings) {
    summary[std::string(severity_name(f.severity))] = summary[std::string(severity_name(f.severity))].get<int>() + 1;
    findings.push_back(to_json(f));
  }
  ordered_json notes = ordered_json::array();
  for (const auto& n : r.notes) notes.push_back({{"kind", n.kind}, {"file", n.file}, {"message", n.message}});
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["target"] = {{"path", r.target_path}, {"digest", r.digest}};
  j["mode"] = mode_name(r.mode);
  j["started_at"] = r.started_at;
  j["finished_at"] = r.finished_at;
  j["rules_version"] = r.rules_version;
  j["summary"] = std::move(summary);
  j["findings"] = std::move(findings);
  j["notes"] = std::move(notes);
  j["stats"] = {{"scripts_total", r.stats.scripts_total},
                {"files_parsed", r.stats.files_parsed},
                {"parse_unsupported", r.stats.parse_unsupported},
                {"normalization_skipped", r.stats.normalization_skipped},
                {"routes_run", r.stats.routes_run},
                {"routes_completed", r.stats.routes_completed},
                {"pages_visited", r.stats.pages_visited},
                {"events_collected", r.stats.events_collected}};
  return j;
}

namespace {

std::string render_text(const Report& r) {
  std::ostringstream out;
  out << "target: " << r.target_path << " (" << mode_name(r.mode) << " scan)\n";
  out << "digest: " << r.digest << "\n";
  out << "findings: " << r.findings.size() << "\n";
  for (Severity s : {Severity::Critical, Severity::High, Severity::Medium, Severity::Low}) {
    bool header = false;
    for (const auto& f : r.findings) {
      if (f.severity != s) continue;
      if (!header) {
        std::string name(severity_name(s));
        for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        out << "\n" << name << "\n";
        header = true;
      }
      std::string where = f.file;
      for (const auto& e : f.evidence) {
        if (e.span && e.file == f.file) {
          where += ":" + std::to_string(e.span->start_line);
          break;
        }
      }
      out << "  [" << category_name(f.category) << "] " << where << "\n";
      out << "    " << f.description << "\n";
      out << "    fix: " << f.remediation << "\n";
    }
  }
  if (!r.notes.empty()) {
    out << "\nnotes:\n";
    for (const auto& n : r.notes) {
      out << "  - " << n.kind << (n.file.empty() ? "" : " " + n.file) << ": " << n.message << "\n";
    }
  }
  out << "\nscripts " << r.stats.files_parsed << "/" << r.stats.scripts_total << " parsed";
  if (r.mode == ScanMode::Full) {
    out << ", routes " << r.stats.routes_completed << "/" << r.stats.routes_run << " completed, "
        << r.stats.events_collected << " events";
  }
  out << "\n";
  return out.str();
}

}  // namespace

std::string render_report(const Report& r, ReportFormat format) {
  if (format == ReportFormat::Text) return render_text(r);
  return report_json(r).dump(2) + "\n";
}

int exit_code(const Report& r) { return r.findings.empty() ? 0 : 1; }

}  // namespace wscan
