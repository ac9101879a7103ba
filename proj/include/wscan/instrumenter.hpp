#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wscan/ast.hpp"
#include "wscan/extension.hpp"
#include "wscan/static_analyzer.hpp"

namespace wscan {

inline constexpr std::string_view kInstrumentedMarker = "/* wr-instrumented v1 */";
inline constexpr std::string_view kCaptureFunction = "__wr_capture";
inline constexpr std::string_view kAgentBuffer = "__wr_buf";

struct InstrumentResult {
  std::string text;
  std::vector<std::string> applied;   // plan ids that received a capture call
  std::vector<std::string> warnings;  // stale plans that were skipped
};

// Inserts one guarded capture statement per insertion point. Plans sharing a point are
// merged into one call whose id argument joins their plan ids with commas. Works on the
// script's normalized source, which is what the plans' node ids refer to.
InstrumentResult apply_instrumentation(const ScriptFile& script, const std::vector<InstrumentationPlan>& plans);
InstrumentResult apply_instrumentation(std::string_view normalized_source, const std::string& file,
                                       const std::vector<InstrumentationPlan>& plans);

// The statement inserted for a plan group, e.g.
// try { typeof __wr_capture === "function" && __wr_capture("f.js#12", {a: a}); } catch (__wr_e) {}
std::string capture_statement(const std::string& plan_ids, const std::vector<std::string>& bindings);

struct PlanLocation {
  std::string file;
  js::Span insertion_span;
};

struct InstrumentedBundle {
  std::filesystem::path out_path;
  std::map<std::string, PlanLocation> plan_index;
  std::string agent_key = std::string(kAgentBuffer);
  std::vector<std::string> agent_scripts;
};

// Writes a copy of the bundle to `out_dir` with rewritten scripts and the agent runtime
// registered ahead of every background and content script and loaded by every HTML page.
InstrumentedBundle package_instrumented(const ExtensionPackage& pkg, const std::map<std::string, std::string>& rewritten,
                                        const std::map<std::string, std::string>& agent_scripts,
                                        const std::filesystem::path& out_dir,
                                        const std::vector<InstrumentationPlan>& plans = {});

// Reads every `*.js` file of an agent directory, keyed by file name.
std::map<std::string, std::string> read_agent_dir(const std::filesystem::path& dir);

}  // namespace wscan
