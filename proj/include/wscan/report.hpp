#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wscan/artifacts.hpp"
#include "wscan/detectors.hpp"

namespace wscan {

enum class ScanMode { Static, Full };
std::string_view mode_name(ScanMode m);

enum class ReportFormat { Json, Text };

struct ReportStats {
  int scripts_total = 0;
  int files_parsed = 0;
  int parse_unsupported = 0;
  int normalization_skipped = 0;
  int routes_run = 0;
  int routes_completed = 0;
  int pages_visited = 0;
  int events_collected = 0;
};

struct Report {
  std::string target_path;
  std::string digest;
  ScanMode mode = ScanMode::Static;
  std::string started_at;
  std::string finished_at;
  std::string rules_version;
  std::vector<Finding> findings;  // sorted by severity desc, category, file
  std::vector<Note> notes;
  ReportStats stats;
};

inline constexpr int kReportSchemaVersion = 1;

// Runs the detectors over a trace file and assembles the report. Timestamps come from
// the trace file, so the same file always yields the same report.
Report build_report(const TraceFile& trace, ScanMode mode, const ValuableFunctionDb& db,
                    const std::vector<std::string>& wordlist);

nlohmann::ordered_json report_json(const Report& r);
std::string render_report(const Report& r, ReportFormat format);

// 0 without findings, 1 with findings.
int exit_code(const Report& r);

}  // namespace wscan
