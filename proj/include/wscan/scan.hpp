#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wscan/artifacts.hpp"
#include "wscan/extension.hpp"
#include "wscan/harness.hpp"
#include "wscan/report.hpp"
#include "wscan/rules.hpp"
#include "wscan/semantics.hpp"

namespace wscan {

struct ScanOptions {
  ScanMode mode = ScanMode::Static;
  ValuableFunctionDb rules = default_rules();
  SemanticsDb semantics = default_semantics();
  HarnessConfig harness;
  std::optional<std::filesystem::path> trace_out;
  std::optional<std::filesystem::path> agent_dir;  // browser agent scripts, required for full mode
  std::optional<std::filesystem::path> work_dir;   // instrumented bundle and profiles; default: temp
};

struct StaticPhase {
  StaticArtifacts artifacts;
  std::vector<InstrumentationPlan> plans;
};

// Loader output through page classification, per-script analysis and plan building.
StaticPhase run_static_phase(const ExtensionPackage& pkg, const std::string& target, const ValuableFunctionDb& db,
                             const SemanticsDb& semantics);

// Page the browser opens first: the action popup, else the first WAR or bundled HTML page.
// Throws kStartPageNotFound.
std::string start_page(const ExtensionPackage& pkg);

// Static phase and, in full mode, instrumentation plus both navigation routes. The
// result is persisted when a trace path is configured. Throws only when the extension
// cannot be loaded.
TraceFile collect(const std::filesystem::path& ext, const ScanOptions& opt);

// collect(), then the detectors over the serialized trace, exactly as replay runs them.
Report scan(const std::filesystem::path& ext, const ScanOptions& opt);
Report replay(const TraceFile& trace, const ValuableFunctionDb& db);

struct CorpusEntry {
  std::string name;
  std::filesystem::path path;
  std::optional<Report> report;
  std::string error;
  std::optional<std::vector<std::string>> expected;  // ground-truth categories from corpus.json
  bool matches_expected = true;
};

// Scans every extension in `dir` over a bounded worker pool. With a corpus.json manifest
// the listed fixtures are scanned and compared against their seeded categories.
std::vector<CorpusEntry> run_corpus(const std::filesystem::path& dir, const ScanOptions& opt, size_t workers);

}  // namespace wscan
